#include <string>
#include <vector>

#include "vorwave/cli.hpp"

int main(int argc, char** argv) {
    return vorwave::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
