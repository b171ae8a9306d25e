#pragma once

#include <filesystem>
#include <string>

#include "iprov/core.hpp"
#include "iprov/rng.hpp"
#include "iprov/synth.hpp"

namespace iprov::testing {

inline ImageRecord test_seed(std::uint64_t seed, int w = 256, int h = 256,
                             std::uint64_t id = 0) {
    Rng rng(seed);
    return make_seed_image(w, h, rng, ImageId{id});
}

inline std::string scratch_dir(const std::string& name) {
    const std::string dir = "/tmp/iprov_tests/" + name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace iprov::testing
