#include "app.hpp"

int main(int argc, char** argv) { return tradegrowth::cli::run(argc, argv); }
