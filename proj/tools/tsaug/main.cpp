#include "tsaug_cli/app.hpp"

int main(int argc, char** argv) { return tsaug::cli::run(argc, argv); }
