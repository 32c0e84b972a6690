#include "mtsw/cli.hpp"

int main(int argc, char** argv) { return mtsw::cli::dispatch(argc, argv); }
