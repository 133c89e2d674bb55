#pragma once

#include <cstdint>

#include "seafarm/field.hpp"

namespace seafarm {

struct Mission {
    std::uint64_t id{0};
    Vec2 x0{};
    double t0{0.0};
    double horizon{0.0};  ///< seconds
    double m0{100.0};     ///< kg
    double u_max{0.0};    ///< length units per second

    void validate() const {
        if (!(horizon > 0.0)) throw InvalidArgument("mission horizon must be positive");
        if (!(m0 > 0.0)) throw InvalidArgument("mission initial mass must be positive");
        if (!(u_max >= 0.0)) throw InvalidArgument("mission u_max must be non-negative");
    }

    double t_end() const { return t0 + horizon; }
};

}  // namespace seafarm
