#include "maxgraph/cli.hpp"

int main(int argc, char** argv) { return maxgraph::cli::run(argc, argv); }
