#include "ltr/cli/cli.hpp"

int main(int argc, char** argv) { return ltr::cli::run(argc, argv); }
