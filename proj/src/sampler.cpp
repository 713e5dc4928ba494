#include "semiknock/sampler.hpp"

#include <stdexcept>

namespace semiknock {

SemiKnockoffDraw draw_from_columns(const TabularDataset& data, const ImputationColumns& cols,
                                   DrawVariant variant, const RngStream& rng) {
    const Eigen::Index n = data.n();
    if (cols.nu_predictions.size() != n || cols.residuals_nu.size() != n ||
        cols.rho_predictions.size() != n || cols.residuals_rho.size() != n) {
        throw std::invalid_argument("imputation columns do not match dataset row count");
    }
    Rng gen(rng);
    SemiKnockoffDraw draw;
    draw.feature_index = cols.feature_index;
    draw.variant = variant;
    draw.permutation_one = gen.permutation(static_cast<std::size_t>(n));
    draw.permutation_two = gen.permutation(static_cast<std::size_t>(n));
    draw.inputs_one = data.inputs;
    draw.inputs_two = data.inputs;
    for (Eigen::Index i = 0; i < n; ++i) {
        draw.inputs_one(i, cols.feature_index) =
            cols.nu_predictions[i] +
            cols.residuals_nu[static_cast<Eigen::Index>(draw.permutation_one[i])];
        draw.inputs_two(i, cols.feature_index) =
            cols.rho_predictions[i] +
            cols.residuals_rho[static_cast<Eigen::Index>(draw.permutation_two[i])];
    }
    return draw;
}

SemiKnockoffDraw draw_semi_knockoff(const TabularDataset& data, const ImputerPair& pair,
                                    const RngStream& rng) {
    return draw_from_columns(data, pair.columns(data), DrawVariant::estimated, rng);
}

SemiKnockoffDraw draw_oracle_semi_knockoff(const TabularDataset& data,
                                           const ConditionalPredictor& oracle_nu,
                                           const ConditionalPredictor& oracle_rho,
                                           const RngStream& rng) {
    return draw_from_columns(data, oracle_imputation(data, oracle_nu, oracle_rho),
                             DrawVariant::oracle, rng);
}

std::vector<SemiKnockoffDraw> draw_batch_from_columns(const TabularDataset& data,
                                                      const ImputationColumns& cols,
                                                      DrawVariant variant, const RngStream& rng,
                                                      int count) {
    if (count < 1) {
        throw std::invalid_argument("draw_batch: count must be >= 1");
    }
    std::vector<SemiKnockoffDraw> draws;
    draws.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        draws.push_back(draw_from_columns(data, cols, variant,
                                          rng.child(static_cast<std::uint64_t>(k))));
    }
    return draws;
}

std::vector<SemiKnockoffDraw> draw_batch(const TabularDataset& data, const ImputerPair& pair,
                                         const RngStream& rng, int count) {
    return draw_batch_from_columns(data, pair.columns(data), DrawVariant::estimated, rng, count);
}

}  // namespace semiknock
