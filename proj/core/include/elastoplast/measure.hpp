#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elastoplast/types.hpp"

namespace elastoplast {

/// Bin layout for empirical measures on M. The one-step law of the constrained
/// chain is a mixture of a planar density and genuine atoms on the lines
/// z = +-1, so the histogram keeps 2-D interior bins, 1-D bins on each
/// boundary line, and one overflow bucket for |y| > ymax.
struct MeasureConfig {
    double ymax = 10.0;
    int ny = 200;
    int nz = 100;

    friend bool operator==(const MeasureConfig&, const MeasureConfig&) = default;

    void validate() const {
        if (!(ymax > 0.0) || ny < 1 || nz < 1)
            throw ValidationError("MeasureConfig: degenerate bin configuration");
    }
};

class EmpiricalMeasure {
public:
    EmpiricalMeasure() : EmpiricalMeasure(MeasureConfig{}) {}
    explicit EmpiricalMeasure(const MeasureConfig& cfg);

    void add(const State& x);
    void merge(const EmpiricalMeasure& other);

    [[nodiscard]] const MeasureConfig& config() const { return cfg_; }
    [[nodiscard]] std::int64_t total() const { return total_; }
    [[nodiscard]] std::int64_t overflow() const { return overflow_; }
    [[nodiscard]] double overflow_fraction() const {
        return total_ == 0 ? 0.0 : static_cast<double>(overflow_) / static_cast<double>(total_);
    }

    [[nodiscard]] std::int64_t interior_count(int iy, int iz) const {
        return interior_[static_cast<std::size_t>(iy) * cfg_.nz + iz];
    }
    [[nodiscard]] std::int64_t upper_count(int iy) const { return upper_[iy]; }
    [[nodiscard]] std::int64_t lower_count(int iy) const { return lower_[iy]; }

    [[nodiscard]] std::int64_t boundary_total() const;
    [[nodiscard]] int occupied_bins() const;

    /// Image under (y,z) -> (-y,-z); exact when ny is even.
    [[nodiscard]] EmpiricalMeasure reflected() const;

    /// Sparse export `y_lo,y_hi,z_lo,z_hi,mass`; boundary lines carry
    /// z_lo = z_hi = +-1, the overflow bucket y_lo = ymax, y_hi = inf.
    [[nodiscard]] std::string to_csv() const;

    friend double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

private:
    [[nodiscard]] int ybin(double y) const;
    [[nodiscard]] int zbin(double z) const;

    MeasureConfig cfg_;
    std::vector<std::int64_t> interior_;  // ny * nz, row-major in y
    std::vector<std::int64_t> upper_;     // atoms on z = +1
    std::vector<std::int64_t> lower_;     // atoms on z = -1
    std::int64_t overflow_ = 0;
    std::int64_t total_ = 0;
};

/// Total variation distance on the bin sigma-algebra: (1/2) sum |p - q| over
/// interior, boundary-line and overflow bins. A metric on fixed-bin measures
/// with values in [0,1]. Requires identical bin configurations.
[[nodiscard]] double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Linear bin ids under the same layout as EmpiricalMeasure: interior bins
/// first (row-major in y), then the z = +1 and z = -1 lines, then overflow.
class BinIndexer {
public:
    explicit BinIndexer(const MeasureConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

    [[nodiscard]] int bins() const { return cfg_.ny * cfg_.nz + 2 * cfg_.ny + 1; }
    [[nodiscard]] int index(const State& x) const;
    [[nodiscard]] const MeasureConfig& config() const { return cfg_; }

private:
    MeasureConfig cfg_;
};

}  // namespace elastoplast
