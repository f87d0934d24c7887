#include "elastoplast/measure.hpp"

#include <algorithm>
#include <cmath>

#include "elastoplast/csv.hpp"

namespace elastoplast {

EmpiricalMeasure::EmpiricalMeasure(const MeasureConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    interior_.assign(static_cast<std::size_t>(cfg_.ny) * cfg_.nz, 0);
    upper_.assign(cfg_.ny, 0);
    lower_.assign(cfg_.ny, 0);
}

int EmpiricalMeasure::ybin(double y) const {
    const double u = (y + cfg_.ymax) / (2.0 * cfg_.ymax);
    return std::clamp(static_cast<int>(u * cfg_.ny), 0, cfg_.ny - 1);
}

int EmpiricalMeasure::zbin(double z) const {
    const double u = (z + 1.0) / 2.0;
    return std::clamp(static_cast<int>(u * cfg_.nz), 0, cfg_.nz - 1);
}

void EmpiricalMeasure::add(const State& x) {
    if (!x.finite()) throw ValidationError("EmpiricalMeasure: non-finite state");
    if (std::abs(x.z) > 1.0) throw ValidationError("EmpiricalMeasure: |z| > 1");
    ++total_;
    if (std::abs(x.y) > cfg_.ymax) {
        ++overflow_;
        return;
    }
    if (x.z == 1.0) {
        ++upper_[ybin(x.y)];
    } else if (x.z == -1.0) {
        ++lower_[ybin(x.y)];
    } else {
        ++interior_[static_cast<std::size_t>(ybin(x.y)) * cfg_.nz + zbin(x.z)];
    }
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
    if (!(cfg_ == other.cfg_)) throw ValidationError("EmpiricalMeasure: bin config mismatch");
    for (std::size_t i = 0; i < interior_.size(); ++i) interior_[i] += other.interior_[i];
    for (int i = 0; i < cfg_.ny; ++i) {
        upper_[i] += other.upper_[i];
        lower_[i] += other.lower_[i];
    }
    overflow_ += other.overflow_;
    total_ += other.total_;
}

std::int64_t EmpiricalMeasure::boundary_total() const {
    std::int64_t s = 0;
    for (int i = 0; i < cfg_.ny; ++i) s += upper_[i] + lower_[i];
    return s;
}

int EmpiricalMeasure::occupied_bins() const {
    int n = 0;
    for (auto c : interior_) n += (c > 0);
    for (auto c : upper_) n += (c > 0);
    for (auto c : lower_) n += (c > 0);
    n += (overflow_ > 0);
    return n;
}

EmpiricalMeasure EmpiricalMeasure::reflected() const {
    EmpiricalMeasure out(cfg_);
    for (int iy = 0; iy < cfg_.ny; ++iy) {
        const int ry = cfg_.ny - 1 - iy;
        for (int iz = 0; iz < cfg_.nz; ++iz) {
            const int rz = cfg_.nz - 1 - iz;
            out.interior_[static_cast<std::size_t>(ry) * cfg_.nz + rz] =
                interior_[static_cast<std::size_t>(iy) * cfg_.nz + iz];
        }
        out.upper_[ry] = lower_[iy];
        out.lower_[ry] = upper_[iy];
    }
    out.overflow_ = overflow_;
    out.total_ = total_;
    return out;
}

std::string EmpiricalMeasure::to_csv() const {
    csv::Writer w({"y_lo", "y_hi", "z_lo", "z_hi", "mass"});
    if (total_ == 0) return w.str();
    const double inv = 1.0 / static_cast<double>(total_);
    const double dy = 2.0 * cfg_.ymax / cfg_.ny;
    const double dz = 2.0 / cfg_.nz;
    for (int iy = 0; iy < cfg_.ny; ++iy) {
        const double ylo = -cfg_.ymax + iy * dy;
        for (int iz = 0; iz < cfg_.nz; ++iz) {
            const auto c = interior_[static_cast<std::size_t>(iy) * cfg_.nz + iz];
            if (c == 0) continue;
            w.row({ylo, ylo + dy, -1.0 + iz * dz, -1.0 + (iz + 1) * dz, c * inv});
        }
    }
    for (int iy = 0; iy < cfg_.ny; ++iy) {
        const double ylo = -cfg_.ymax + iy * dy;
        if (upper_[iy] > 0) w.row({ylo, ylo + dy, 1.0, 1.0, upper_[iy] * inv});
        if (lower_[iy] > 0) w.row({ylo, ylo + dy, -1.0, -1.0, lower_[iy] * inv});
    }
    if (overflow_ > 0) {
        w.row({cfg_.ymax, std::numeric_limits<double>::infinity(), -1.0, 1.0, overflow_ * inv});
    }
    return w.str();
}

int BinIndexer::index(const State& x) const {
    if (!x.finite() || std::abs(x.z) > 1.0) throw ValidationError("BinIndexer: state outside M");
    const int ny = cfg_.ny, nz = cfg_.nz;
    if (std::abs(x.y) > cfg_.ymax) return ny * nz + 2 * ny;  // overflow
    const double uy = (x.y + cfg_.ymax) / (2.0 * cfg_.ymax);
    const int iy = std::clamp(static_cast<int>(uy * ny), 0, ny - 1);
    if (x.z == 1.0) return ny * nz + iy;
    if (x.z == -1.0) return ny * nz + ny + iy;
    const double uz = (x.z + 1.0) / 2.0;
    const int iz = std::clamp(static_cast<int>(uz * nz), 0, nz - 1);
    return iy * nz + iz;
}

double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (!(a.cfg_ == b.cfg_)) throw ValidationError("tv_distance: bin config mismatch");
    if (a.total_ == 0 || b.total_ == 0)
        throw ValidationError("tv_distance: empty measure");
    const double ia = 1.0 / static_cast<double>(a.total_);
    const double ib = 1.0 / static_cast<double>(b.total_);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.interior_.size(); ++i)
        acc += std::abs(a.interior_[i] * ia - b.interior_[i] * ib);
    for (int i = 0; i < a.cfg_.ny; ++i) {
        acc += std::abs(a.upper_[i] * ia - b.upper_[i] * ib);
        acc += std::abs(a.lower_[i] * ia - b.lower_[i] * ib);
    }
    acc += std::abs(a.overflow_ * ia - b.overflow_ * ib);
    return 0.5 * acc;
}

}  // namespace elastoplast
