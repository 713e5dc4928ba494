#pragma once

#include <Eigen/Dense>
#include <vector>

#include "semiknock/dataset.hpp"
#include "semiknock/imputer.hpp"
#include "semiknock/rng.hpp"

namespace semiknock {

enum class DrawVariant { estimated, oracle };

// One pair of perturbed matrices for feature j: inputs differ from the
// original only in column j, which is rebuilt as prediction + permuted
// residual.
struct SemiKnockoffDraw {
    Eigen::Index feature_index = 0;
    DrawVariant variant = DrawVariant::estimated;
    Eigen::MatrixXd inputs_one;  // nu side
    Eigen::MatrixXd inputs_two;  // rho side
    std::vector<std::size_t> permutation_one;
    std::vector<std::size_t> permutation_two;
};

// Core construction shared by the estimated and oracle variants; the two
// permutations are drawn independently and uniformly from rng.
SemiKnockoffDraw draw_from_columns(const TabularDataset& data, const ImputationColumns& cols,
                                   DrawVariant variant, const RngStream& rng);

SemiKnockoffDraw draw_semi_knockoff(const TabularDataset& data, const ImputerPair& pair,
                                    const RngStream& rng);

SemiKnockoffDraw draw_oracle_semi_knockoff(const TabularDataset& data,
                                           const ConditionalPredictor& oracle_nu,
                                           const ConditionalPredictor& oracle_rho,
                                           const RngStream& rng);

// k draws with independent streams derived from rng
std::vector<SemiKnockoffDraw> draw_batch(const TabularDataset& data, const ImputerPair& pair,
                                         const RngStream& rng, int count);

std::vector<SemiKnockoffDraw> draw_batch_from_columns(const TabularDataset& data,
                                                      const ImputationColumns& cols,
                                                      DrawVariant variant, const RngStream& rng,
                                                      int count);

}  // namespace semiknock
