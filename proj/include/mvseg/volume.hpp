#ifndef MVSEG_VOLUME_HPP
#define MVSEG_VOLUME_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mvseg/errors.hpp"

namespace mvseg {

// 3D scalar field with physical spacing. Axis order is fixed as
// (slice, row, col); memory layout is col-fastest, matching NIfTI.
// Spacing components are sx (col), sy (row), sz (slice) in mm.
template <class T>
struct Grid {
    int slices = 0;
    int rows = 0;
    int cols = 0;
    double sx = 1.0, sy = 1.0, sz = 1.0;
    double ox = 0.0, oy = 0.0, oz = 0.0;
    std::vector<T> data;
    // Raw NIfTI header captured at load time; orientation fields ride along
    // opaquely and are re-emitted on save. Empty for grids built in memory.
    std::vector<uint8_t> header_blob;

    Grid() = default;
    Grid(int slices_, int rows_, int cols_, double sx_ = 1.0, double sy_ = 1.0,
         double sz_ = 1.0)
        : slices(slices_), rows(rows_), cols(cols_), sx(sx_), sy(sy_), sz(sz_),
          data(static_cast<size_t>(slices_) * rows_ * cols_) {}

    size_t voxel_count() const {
        return static_cast<size_t>(slices) * rows * cols;
    }
    size_t index(int k, int i, int j) const {
        return (static_cast<size_t>(k) * rows + i) * cols + j;
    }
    T& at(int k, int i, int j) { return data[index(k, i, j)]; }
    const T& at(int k, int i, int j) const { return data[index(k, i, j)]; }

    void validate(const std::string& what = "grid") const {
        if (slices < 1 || rows < 1 || cols < 1)
            throw ValidationError(what + ": all dimensions must be >= 1");
        if (!(sx > 0.0) || !(sy > 0.0) || !(sz > 0.0))
            throw ValidationError(what + ": spacing must be strictly positive");
        if (data.size() != voxel_count())
            throw ValidationError(what + ": data size does not match shape");
    }

    bool same_shape(const Grid& o) const {
        return slices == o.slices && rows == o.rows && cols == o.cols;
    }
    template <class U>
    bool same_geometry(const Grid<U>& o, double tol = 1e-6) const {
        return slices == o.slices && rows == o.rows && cols == o.cols &&
               std::fabs(sx - o.sx) <= tol && std::fabs(sy - o.sy) <= tol &&
               std::fabs(sz - o.sz) <= tol;
    }
};

using VolumeGrid = Grid<float>;
using LabelMap = Grid<uint8_t>;

// load_volume dispatches on the stored voxel type.
using AnyVolume = std::variant<VolumeGrid, LabelMap>;

// Physical diagonal in mm; in-plane only for single-slice grids. Used as
// the documented penalty when exactly one mask of a metric pair is empty.
template <class T>
double image_diagonal_mm(const Grid<T>& g) {
    double dx = g.cols * g.sx;
    double dy = g.rows * g.sy;
    double dz = g.slices > 1 ? g.slices * g.sz : 0.0;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

} // namespace mvseg

#endif
