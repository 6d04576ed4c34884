#include "yarnscope/cli.hpp"

int main(int argc, char** argv) { return yarnscope::cli::main(argc, argv); }
