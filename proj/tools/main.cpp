#include <cstdio>

int main() {
    std::puts("genplan2d: CLI not wired up yet");
    return 0;
}
