#include "egotraj_cli/cli.hpp"

int main(int argc, char** argv) { return egotraj::cli::run(argc, argv); }
