#include "mvseg/augment.hpp"

#include <cmath>

namespace mvseg {

DrawnTransform draw_transform(const AugmentPolicy& policy, Rng& rng) {
    DrawnTransform t;
    t.flip_h = rng.bernoulli(policy.p_flip_h);
    t.flip_v = rng.bernoulli(policy.p_flip_v);
    t.rot_deg = policy.max_rot_deg > 0
                    ? rng.uniform(-policy.max_rot_deg, policy.max_rot_deg)
                    : 0.0;
    t.zoom = policy.zoom_max > policy.zoom_min
                 ? rng.uniform(policy.zoom_min, policy.zoom_max)
                 : policy.zoom_min;
    return t;
}

namespace {

bool is_identity(const DrawnTransform& t) {
    return !t.flip_h && !t.flip_v && t.rot_deg == 0.0 && t.zoom == 1.0;
}

} // namespace

void apply_transform(SlicePair& slice, const DrawnTransform& t) {
    if (slice.rows < 1 || slice.cols < 1)
        throw ValidationError("augment: empty slice");
    size_t n = static_cast<size_t>(slice.rows) * slice.cols;
    if (slice.image.size() != n || slice.labels.size() != n)
        throw ValidationError("augment: image and label slices must share shape");
    if (is_identity(t)) return;

    const double cy = (slice.rows - 1) / 2.0;
    const double cx = (slice.cols - 1) / 2.0;
    const double rad = t.rot_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double inv_zoom = 1.0 / t.zoom;

    std::vector<float> img(n, 0.0f);
    std::vector<uint8_t> lab(n, 0);

    for (int i = 0; i < slice.rows; ++i) {
        for (int j = 0; j < slice.cols; ++j) {
            double py = i - cy;
            double px = j - cx;
            if (t.flip_v) py = -py;
            if (t.flip_h) px = -px;
            // inverse rotation then inverse zoom, all about the center
            double sy = (c * py - s * px) * inv_zoom + cy;
            double sx = (s * py + c * px) * inv_zoom + cx;

            size_t dst = static_cast<size_t>(i) * slice.cols + j;

            // nearest for the labels
            int ni = static_cast<int>(std::floor(sy + 0.5));
            int nj = static_cast<int>(std::floor(sx + 0.5));
            if (ni >= 0 && ni < slice.rows && nj >= 0 && nj < slice.cols)
                lab[dst] = slice.labels[static_cast<size_t>(ni) * slice.cols + nj];

            // bilinear with zero background for the image
            int y0 = static_cast<int>(std::floor(sy));
            int x0 = static_cast<int>(std::floor(sx));
            double fy = sy - y0, fx = sx - x0;
            double acc = 0.0;
            for (int dy = 0; dy <= 1; ++dy) {
                int yy = y0 + dy;
                if (yy < 0 || yy >= slice.rows) continue;
                double wy = dy ? fy : 1.0 - fy;
                if (wy == 0.0) continue;
                for (int dx = 0; dx <= 1; ++dx) {
                    int xx = x0 + dx;
                    if (xx < 0 || xx >= slice.cols) continue;
                    double wx = dx ? fx : 1.0 - fx;
                    if (wx == 0.0) continue;
                    acc += wy * wx *
                           slice.image[static_cast<size_t>(yy) * slice.cols + xx];
                }
            }
            img[dst] = static_cast<float>(acc);
        }
    }
    slice.image = std::move(img);
    slice.labels = std::move(lab);
}

void augment_pair(SlicePair& sa, SlicePair& la, const AugmentPolicy& policy,
                  Rng& rng) {
    policy.validate();
    DrawnTransform t_sa = draw_transform(policy, rng);
    DrawnTransform t_la = policy.independent_views ? draw_transform(policy, rng)
                                                   : t_sa;
    apply_transform(sa, t_sa);
    apply_transform(la, t_la);
}

} // namespace mvseg
