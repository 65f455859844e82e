#include <iostream>

#include "mlwos/cli.hpp"

int main(int argc, char** argv) {
    mlwos::cli::RunConfig config;
    try {
        config = mlwos::cli::parse_args(argc, argv);
    } catch (const mlwos::cli::HelpRequested& e) {
        std::cout << e.what();
        return 0;
    } catch (const mlwos::cli::UsageError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return mlwos::cli::run(config, std::cout, std::cerr);
}
