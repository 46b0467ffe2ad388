#include <exception>
#include <iostream>

#include "rsg/cli.hpp"
#include "rsg/error.hpp"

int main(int argc, char** argv) {
    try {
        return rsg::run_cli(argc, argv);
    } catch (const rsg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_precondition() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
