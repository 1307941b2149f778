#include "geolab/cli.hpp"

int main(int argc, char** argv) { return geolab::run_cli(argc, argv); }
