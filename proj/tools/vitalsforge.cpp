#include "vitalsforge/cli.hpp"

int main(int argc, char** argv) { return vitalsforge::cli::run(argc, argv); }
