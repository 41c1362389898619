#include "confproj/cli.hpp"

int main(int argc, char** argv) { return confproj::cli::run(argc, argv); }
