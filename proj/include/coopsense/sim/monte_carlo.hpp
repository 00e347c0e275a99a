#pragma once

#include "coopsense/geometry/pose.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace coopsense::sim {

using geometry::GaussianPose2;

/// Sampling reference for the frame transform: draws receiver, sender and
/// object poses from their Gaussians, transforms every sample and returns the
/// sample mean (circular for the heading) and sample covariance. Identical
/// seeds give identical bits. Throws std::invalid_argument for n_samples == 0.
GaussianPose2 monte_carlo_reference(const GaussianPose2& receiver, const GaussianPose2& sender,
                                    const GaussianPose2& object_in_sender, std::size_t n_samples,
                                    std::uint64_t seed);

/// Same estimate for several objects sharing one receiver/sender pair. The
/// station samples and the standard normal draws of the object noise are
/// shared across objects (common random numbers), so each result is
/// distributed exactly as a separate call would be.
std::vector<GaussianPose2> monte_carlo_reference_batch(const GaussianPose2& receiver, const GaussianPose2& sender,
                                                       std::span<const GaussianPose2> objects_in_sender,
                                                       std::size_t n_samples, std::uint64_t seed);

}  // namespace coopsense::sim
