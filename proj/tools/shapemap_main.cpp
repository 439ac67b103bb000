#include <cstdio>

int main() {
    std::puts("shapemap: CLI under construction");
    return 0;
}
