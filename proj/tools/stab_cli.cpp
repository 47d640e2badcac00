#include "stab/analyzer.hpp"
int main() { return 0; }
