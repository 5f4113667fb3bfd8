#include "pbitsim/errors.hpp"
#include "pbitsim/rbm.hpp"

namespace pbitsim::rbm {

std::vector<Sample> make_pattern_set(std::size_t n, int n_classes, double flip_noise,
                                     std::uint64_t seed) {
    if (n_classes < 2 || n_classes > 3) throw DomainError("pattern set supports 2 or 3 classes");
    if (!(flip_noise >= 0.0 && flip_noise < 0.5)) throw DomainError("flip noise must be in [0, 0.5)");
    constexpr int side = 8;
    Rng rng(seed);
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Sample s;
        s.label = static_cast<int>(k % static_cast<std::size_t>(n_classes));
        s.pixels.assign(side * side, 0);
        const int offset = static_cast<int>(rng() % 4);
        for (int r = 0; r < side; ++r) {
            for (int c = 0; c < side; ++c) {
                bool on = false;
                // two-class sets pair stripes with the checkerboard
                const int kind = (n_classes == 2 && s.label == 1) ? 2 : s.label;
                switch (kind) {
                    case 0: on = r % 4 == offset; break;
                    case 1: on = c % 4 == offset; break;
                    default: on = ((r + offset) / 2 + (c + offset) / 2) % 2 == 0; break;
                }
                s.pixels[static_cast<std::size_t>(r * side + c)] = on ? 1 : 0;
            }
        }
        for (auto& px : s.pixels) {
            if (uniform01(rng) < flip_noise) px ^= 1;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace pbitsim::rbm
