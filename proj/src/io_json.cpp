#include "stab/io_json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stab {

namespace {

using nlohmann::json;

Vec to_vec(const json& j, const std::string& field) {
  if (!j.is_array())
    throw ValidationError("problem file: field '" + field + "' must be an array");
  Vec v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& e : j) {
    if (e.is_null())
      throw ValidationError("problem file: null entry in '" + field + "'");
    v(i++) = e.get<double>();
  }
  return v;
}

// null entries encode infinite bounds.
Vec to_vec_with_inf(const json& j, double inf_sign, const std::string& field) {
  if (!j.is_array())
    throw ValidationError("problem file: field '" + field + "' must be an array");
  Vec v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& e : j) {
    if (e.is_null())
      v(i++) = inf_sign * kPlusInfinity;
    else if (e.is_string()) {
      const std::string s = e.get<std::string>();
      if (s == "inf" || s == "+inf") v(i++) = kPlusInfinity;
      else if (s == "-inf") v(i++) = -kPlusInfinity;
      else throw ValidationError("problem file: bad bound string '" + s + "'");
    } else {
      v(i++) = e.get<double>();
    }
  }
  return v;
}

Mat to_mat(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ValidationError("problem file: field '" + field + "' must be a nonempty matrix");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<size_t>(r));
    if (static_cast<Index>(row.size()) != cols)
      throw ValidationError("problem file: ragged matrix in '" + field + "'");
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  return m;
}

GSpec parse_gspec(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "polyhedral") {
    std::vector<Index> eq;
    if (j.contains("eq_rows"))
      for (const auto& e : j.at("eq_rows")) eq.push_back(e.get<Index>());
    return GSpec::polyhedral(to_mat(j.at("A"), "g.A"), to_vec(j.at("c"), "g.c"), eq);
  }
  if (kind == "box")
    return GSpec::box(to_vec_with_inf(j.at("l"), -1.0, "g.l"),
                      to_vec_with_inf(j.at("u"), +1.0, "g.u"));
  if (kind == "l1") return GSpec::l1(to_vec(j.at("weights"), "g.weights"));
  if (kind == "quadratic")
    return GSpec::quadratic(to_mat(j.at("Q"), "g.Q"), to_vec(j.at("c"), "g.c"));
  if (kind == "separable") {
    std::vector<GSpec> parts;
    for (const auto& p : j.at("parts")) parts.push_back(parse_gspec(p));
    return GSpec::separable(std::move(parts));
  }
  throw ValidationError("problem file: unknown g kind '" + kind + "'");
}

}  // namespace

ProblemInstance parse_problem(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": JSON parse error: " + e.what());
  }
  try {
    const Index n = j.at("n").get<Index>();
    const Index m = j.at("m").get<Index>();
    Expr f = Expr::parse(j.at("f").get<std::string>(), n);
    std::vector<Expr> big_f;
    for (const auto& e : j.at("F")) big_f.push_back(Expr::parse(e.get<std::string>(), n));
    GSpec g = parse_gspec(j.at("g"));
    const auto& point = j.at("point");
    Vec x = to_vec(point.at("x"), "point.x");
    Vec ystar = to_vec(point.at("y_star"), "point.y_star");
    return ProblemInstance(n, m, std::move(f), std::move(big_f), std::move(g),
                           std::move(x), std::move(ystar));
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": bad problem file: " + e.what());
  } catch (const ParseError& e) {
    throw ValidationError(origin + ": expression error: " + e.what());
  }
}

ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

namespace {

// Minimal JSON emitter with fixed 17-significant-digit floats.
class JsonWriter {
 public:
  void number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ << buf;
  }
  void string(const std::string& s) {
    out_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ << "\\\""; break;
        case '\\': out_ << "\\\\"; break;
        case '\n': out_ << "\\n"; break;
        case '\t': out_ << "\\t"; break;
        default: out_ << c;
      }
    }
    out_ << '"';
  }
  void raw(const std::string& s) { out_ << s; }
  void vec(const Vec& v) {
    out_ << '[';
    for (Index i = 0; i < v.size(); ++i) {
      if (i) out_ << ',';
      number(v(i));
    }
    out_ << ']';
  }
  void mat(const Mat& m) {
    out_ << '[';
    for (Index r = 0; r < m.rows(); ++r) {
      if (r) out_ << ',';
      vec(m.row(r).transpose());
    }
    out_ << ']';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void emit_tristate(JsonWriter& w, const char* key, TriState t, bool& first) {
  if (!first) w.raw(",");
  first = false;
  w.string(key);
  w.raw(":");
  w.string(to_string(t));
}

void emit_bool(JsonWriter& w, const char* key, bool v, bool& first) {
  if (!first) w.raw(",");
  first = false;
  w.string(key);
  w.raw(":");
  w.raw(v ? "true" : "false");
}

void emit_certificate(JsonWriter& w, const char* key, const std::optional<Certificate>& c,
                      bool& first) {
  if (!c) return;
  if (!first) w.raw(",");
  first = false;
  w.string(key);
  w.raw(":{\"description\":");
  w.string(c->description);
  if (c->u.size() > 0) {
    w.raw(",\"u\":");
    w.vec(c->u);
  }
  if (c->vstar.size() > 0) {
    w.raw(",\"v_star\":");
    w.vec(c->vstar);
  }
  w.raw("}");
}

}  // namespace

std::string report_to_json(const StabilityReport& report, uint64_t seed) {
  JsonWriter w;
  w.raw("{\"verdicts\":{");
  bool first = true;
  emit_bool(w, "soqc", report.soqc.ok, first);
  emit_bool(w, "bcq", report.bcq.ok, first);
  emit_bool(w, "sc_singleton", report.sc_singleton, first);
  emit_bool(w, "necessary_vs", report.necessary_vs.ok, first);
  emit_bool(w, "strong_vs", report.strong_vs.ok, first);
  if (report.singleton_regular) emit_bool(w, "singleton_regular", *report.singleton_regular, first);
  if (report.mordukhovich_polyhedral)
    emit_bool(w, "mordukhovich_polyhedral", *report.mordukhovich_polyhedral, first);
  emit_tristate(w, "mordukhovich_aubin", report.mordukhovich_aubin, first);
  emit_tristate(w, "sll", report.sll, first);
  emit_tristate(w, "tilt_stable", report.tilt_stable, first);
  emit_tristate(w, "full_stability", report.full_stability, first);
  w.raw("},\"certificates\":{");
  first = true;
  emit_certificate(w, "soqc", report.soqc.certificate, first);
  emit_certificate(w, "bcq", report.bcq.certificate, first);
  emit_certificate(w, "necessary_vs", report.necessary_vs.certificate, first);
  emit_certificate(w, "strong_vs", report.strong_vs.certificate, first);
  emit_certificate(w, "aubin", report.aubin_certificate, first);
  w.raw("},\"jacobian\":");
  if (report.localization_jacobian)
    w.mat(*report.localization_jacobian);
  else
    w.raw("null");
  w.raw(",\"notes\":[");
  for (size_t i = 0; i < report.notes.size(); ++i) {
    if (i) w.raw(",");
    w.string(report.notes[i]);
  }
  w.raw("],\"tool_version\":");
  w.string(kToolVersion);
  w.raw(",\"seed\":");
  w.raw(std::to_string(seed));
  w.raw("}");
  return w.str();
}

}  // namespace stab
