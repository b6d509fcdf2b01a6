#include <cmath>
#include <random>

#include "amc/training.hpp"

namespace amc {

std::pair<std::size_t, std::size_t> fan_in_out(const Shape& shape) {
    if (shape.size() < 2) throw DimensionError("fan_in_out: weight needs rank >= 2, got " + shape_str(shape));
    std::size_t receptive = 1;
    for (std::size_t a = 2; a < shape.size(); ++a) receptive *= shape[a];
    return {shape[1] * receptive, shape[0] * receptive};
}

template <typename T>
void xavier_init(AmcNet<T>& model, std::uint64_t seed) {
    auto& params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        auto values = p.tensor.values();
        if (p.name.ends_with(".weight") || p.name.ends_with(".kernel")) {
            const auto [fan_in, fan_out] = fan_in_out(p.tensor.shape());
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            std::mt19937_64 rng(mix_seed(seed, i));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (auto& v : values) v = static_cast<T>(dist(rng));
        } else {
            const T fill = p.name.ends_with(".gamma") ? T(1) : T(0);
            std::fill(values.begin(), values.end(), fill);
        }
    }
    for (auto& m : model.msm_moments()) m = RunningMoments<T>(m.mean.size());
}

template void xavier_init(AmcNet<float>&, std::uint64_t);
template void xavier_init(AmcNet<double>&, std::uint64_t);

}  // namespace amc
