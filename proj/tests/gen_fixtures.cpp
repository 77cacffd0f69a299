// Regenerates the bundled fixtures (corpus, dataset, config, transcript
// cassette). Run after changing prompt templates or the fixture world:
//
//   ./build/tests/ckgrag_gen_fixtures fixtures

#include <iostream>

#include "fixture_world.hpp"

int main(int argc, char** argv) {
    std::filesystem::path out = argc > 1 ? argv[1] : CKGRAG_FIXTURES_DIR;
    try {
        ckgrag::testing::write_fixture_bundle(out);
    } catch (const std::exception& e) {
        std::cerr << "fixture generation failed: " << e.what() << "\n";
        return 1;
    }
    std::cout << "fixture bundle written to " << out << "\n";
    return 0;
}
