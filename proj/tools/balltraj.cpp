#include "balltraj/cli/commands.hpp"

int main(int argc, char** argv) { return balltraj::cli::run(argc, argv); }
