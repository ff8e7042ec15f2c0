#include <cstdio>
int main() { std::puts("acceptance suite not wired up yet"); return 1; }
