// gcs-vectors: writes the golden wire vectors consumed by the browser console.

#include <fstream>
#include <iostream>

#include "support/vectors.hpp"

int main(int argc, char** argv)
{
    const auto text = gcs::testing::wire_vectors().dump(2) + "\n";
    if (argc < 2) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(argv[1], std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "gcs-vectors: cannot write " << argv[1] << '\n';
        return 1;
    }
    return 0;
}
