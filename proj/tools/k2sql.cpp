#include "k2sql/cli/commands.hpp"

int main(int argc, char** argv) { return k2sql::cli::run(argc, argv); }
