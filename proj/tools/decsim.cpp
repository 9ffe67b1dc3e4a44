#include "decsim/cli.hpp"

int main(int argc, char** argv) { return decsim::cli::run(argc, argv); }
