#include "rom/latent_io.hpp"

#include "rom/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace rom {

void LatentTrajectory::validate() const
{
    if (times.size() != vectors.size()) {
        throw ShapeError("latent trajectory has " + std::to_string(times.size()) + " times but " +
                         std::to_string(vectors.size()) + " vectors");
    }
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim() || vectors[i].empty()) {
            throw ShapeError("latent vector " + std::to_string(i) + " has inconsistent dimension");
        }
        for (double v : vectors[i]) {
            if (!std::isfinite(v)) throw DomainError("latent vector " + std::to_string(i) + " is not finite");
        }
    }
    if (times.size() >= 3) {
        const double dt = times[1] - times[0];
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double step = times[i] - times[i - 1];
            if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * std::abs(dt)) {
                throw DomainError("latent trajectory times are not uniformly spaced at index " + std::to_string(i));
            }
        }
    }
}

LatentTrajectory LatentTrajectory::slice(std::size_t first, std::size_t count) const
{
    if (first + count > size()) throw ShapeError("latent slice out of range");
    LatentTrajectory out;
    out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(first),
                     times.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.vectors.assign(vectors.begin() + static_cast<std::ptrdiff_t>(first),
                       vectors.begin() + static_cast<std::ptrdiff_t>(first + count));
    return out;
}

void save_latents_csv(const LatentTrajectory& traj, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "t";
    for (std::size_t d = 0; d < traj.dim(); ++d) os << ",z" << (d + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << traj.times[i];
        for (double v : traj.vectors[i]) os << ',' << v;
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path.string());
}

LatentTrajectory load_latents_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("t", 0) != 0) {
        throw FormatError(path.string() + ": missing latent CSV header");
    }
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 2) throw FormatError(path.string() + ": latent CSV needs at least one latent column");

    LatentTrajectory traj;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> values;
        std::size_t start = 0;
        while (start <= line.size()) {
            auto end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
            if (ec != std::errc{} || ptr != line.data() + end) {
                throw FormatError(path.string() + ": bad number on row " + std::to_string(row));
            }
            values.push_back(v);
            start = end + 1;
        }
        if (values.size() != columns) {
            throw FormatError(path.string() + ": row " + std::to_string(row) + " has " +
                              std::to_string(values.size()) + " columns, expected " + std::to_string(columns));
        }
        traj.times.push_back(values.front());
        traj.vectors.emplace_back(values.begin() + 1, values.end());
    }
    traj.validate();
    return traj;
}

} // namespace rom
