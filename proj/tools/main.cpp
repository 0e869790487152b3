#include "toolqa/cli.hpp"

int main(int argc, char** argv) { return toolqa::cli::run_cli(argc, argv); }
