#include "sketchdesc/cli.hpp"

int main(int argc, char** argv) { return sketchdesc::cli_main(argc, argv); }
