#include <string>
#include <vector>

#include "ehaloha/runner.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return ehaloha::cli::main_entry(args);
}
