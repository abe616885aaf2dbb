#include <saddlekit/cli.hpp>

int main(int argc, char** argv) { return saddlekit::cli::run(argc, argv); }
