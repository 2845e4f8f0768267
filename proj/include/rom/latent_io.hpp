#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace rom {

/// Time-indexed sequence of latent vectors z(t).
struct LatentTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> vectors;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
    std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().size(); }

    /// Throws unless lengths agree, every vector has the same dimension,
    /// values are finite and (for >= 3 points) times are uniformly spaced.
    void validate() const;

    LatentTrajectory slice(std::size_t first, std::size_t count) const;
};

/// CSV with header t,z1,...,zN and full round-trip precision.
void save_latents_csv(const LatentTrajectory& traj, const std::filesystem::path& path);
LatentTrajectory load_latents_csv(const std::filesystem::path& path);

} // namespace rom
