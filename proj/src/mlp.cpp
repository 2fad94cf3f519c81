#include "osfp/mlp.hpp"

#include <sstream>

namespace osfp {

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
    if (!(learning_rate > 0)) fail("learning_rate must be positive");
    if (!(momentum >= 0 && momentum < 1)) fail("momentum must lie in [0, 1)");
    const bool fixed = rate_increase == 1.0 && rate_decrease == 1.0;
    if (!fixed && !(rate_decrease > 0 && rate_decrease < 1 && rate_increase > 1))
        fail("need 0 < rate_decrease < 1 < rate_increase");
    if (!(min_rate > 0 && min_rate <= max_rate)) fail("need 0 < min_rate <= max_rate");
    if (generations == 0) fail("generations must be positive");
}

std::optional<std::size_t> TrainHistory::generations_to_reach(double threshold) const {
    for (std::size_t i = 0; i < mse.size(); ++i)
        if (mse[i] <= threshold) return i + 1;
    return std::nullopt;
}

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "generation,mse,lambda,G\n";
    std::size_t next_fit = 0;
    for (std::size_t i = 0; i < mse.size(); ++i) {
        out << (i + 1) << ',' << mse[i] << ',' << lambda[i] << ',';
        while (next_fit < fitness.size() && fitness[next_fit].generation < i + 1) ++next_fit;
        if (next_fit < fitness.size() && fitness[next_fit].generation == i + 1) out << fitness[next_fit].g;
        out << '\n';
    }
    return out.str();
}

}  // namespace osfp
