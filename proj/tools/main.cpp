#include <aibo/harness.hpp>

int main(int argc, char** argv) {
    return aibo::run_cli(argc, argv);
}
