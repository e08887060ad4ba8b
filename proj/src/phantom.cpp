#include "mvseg/phantom.hpp"

#include <cmath>

#include "mvseg/nifti.hpp"
#include "mvseg/rng.hpp"

namespace mvseg {

namespace fs = std::filesystem;

void PhantomParams::validate() const {
    if (slices < 1 || rows < 8 || cols < 8)
        throw ValidationError("phantom grid too small");
    if (!(sx > 0) || !(sy > 0) || !(sz > 0) || !(la_row_spacing > 0))
        throw ValidationError("phantom spacing must be positive");
    if (!(lv_radius_mm > 0) || !(lv_long_radius_mm > 0) || !(myo_thickness_mm > 0) ||
        !(rv_radius_mm > 0) || !(rv_long_radius_mm > 0))
        throw ValidationError("phantom radii and thickness must be positive");
    if (!(ed_factor > 0) || ed_factor > 1.0 || !(es_factor > 0) || es_factor > 1.0)
        throw ValidationError("contraction factors must lie in (0,1]");
    if (!(es_factor < ed_factor))
        throw ValidationError("ES contraction factor must be smaller than ED");
    if (noise_sigma < 0) throw ValidationError("noise sigma must be >= 0");

    // The largest (ED) configuration must fit inside the grid.
    double grow = (1.0 + jitter_scale) * ed_factor;
    double need_xy = grow * (rv_offset_mm + rv_radius_mm) + jitter_shift_mm;
    double need_xy_lv = grow * (lv_radius_mm + myo_thickness_mm) + jitter_shift_mm;
    double half_x = cols * sx / 2.0, half_y = rows * sy / 2.0;
    if (std::max(need_xy, need_xy_lv) > std::min(half_x, half_y))
        throw ValidationError("phantom shapes exceed the in-plane grid extent");
    double need_z = grow * std::max(lv_long_radius_mm + myo_thickness_mm,
                                    rv_long_radius_mm);
    if (need_z > slices * sz / 2.0)
        throw ValidationError("phantom shapes exceed the long-axis grid extent");
}

namespace {

// One subject's realized geometry (after jitter), in physical mm.
struct HeartShape {
    double hx, hy, hz;   // heart center
    double cos_a, sin_a; // in-plane rotation
    double lv_r, lv_rz;  // endocardial semi-axes
    double epi_r, epi_rz;
    double rv_off, rv_r, rv_rz;

    // challenge label at a physical point, given a contraction factor
    uint8_t label_at(double x, double y, double z, double f) const {
        double dx = x - hx, dy = y - hy, dz = z - hz;
        double u = cos_a * dx + sin_a * dy;
        double v = -sin_a * dx + cos_a * dy;

        auto inside = [&](double cu, double ru, double rv_, double rz) {
            double a = (u - cu) / ru, b = v / rv_, c = dz / rz;
            return a * a + b * b + c * c <= 1.0;
        };
        if (inside(0.0, f * lv_r, f * lv_r, f * lv_rz)) return 1;
        bool in_epi = inside(0.0, f * epi_r, f * epi_r, f * epi_rz);
        if (in_epi) return 2;
        if (inside(f * rv_off, f * rv_r, f * rv_r, f * rv_rz)) return 3;
        return 0;
    }
};

HeartShape make_shape(const PhantomParams& p, Rng& rng) {
    HeartShape s;
    s.hx = (p.cols - 1) * p.sx / 2.0 + rng.uniform(-p.jitter_shift_mm, p.jitter_shift_mm);
    s.hy = (p.rows - 1) * p.sy / 2.0 + rng.uniform(-p.jitter_shift_mm, p.jitter_shift_mm);
    s.hz = (p.slices - 1) * p.sz / 2.0;
    double alpha = rng.uniform(-p.jitter_rot_deg, p.jitter_rot_deg) * M_PI / 180.0;
    s.cos_a = std::cos(alpha);
    s.sin_a = std::sin(alpha);
    double scale = 1.0 + rng.uniform(-p.jitter_scale, p.jitter_scale);
    s.lv_r = scale * p.lv_radius_mm;
    s.lv_rz = scale * p.lv_long_radius_mm;
    s.epi_r = s.lv_r + scale * p.myo_thickness_mm;
    s.epi_rz = s.lv_rz + scale * p.myo_thickness_mm;
    s.rv_off = scale * p.rv_offset_mm;
    s.rv_r = scale * p.rv_radius_mm;
    s.rv_rz = scale * p.rv_long_radius_mm;
    return s;
}

void rasterize_sa(const PhantomParams& p, const HeartShape& s, double f,
                  const double tissue_mean[4], Rng& noise, VolumeGrid& img,
                  LabelMap& lab) {
    img = VolumeGrid(p.slices, p.rows, p.cols, p.sx, p.sy, p.sz);
    lab = LabelMap(p.slices, p.rows, p.cols, p.sx, p.sy, p.sz);
    for (int k = 0; k < p.slices; ++k) {
        double z = k * p.sz;
        for (int i = 0; i < p.rows; ++i) {
            double y = i * p.sy;
            for (int j = 0; j < p.cols; ++j) {
                double x = j * p.sx;
                uint8_t l = s.label_at(x, y, z, f);
                lab.at(k, i, j) = l;
                img.at(k, i, j) = static_cast<float>(
                    tissue_mean[l] + (p.noise_sigma > 0
                                          ? noise.gaussian(0.0, p.noise_sigma)
                                          : 0.0));
            }
        }
    }
}

void rasterize_la(const PhantomParams& p, const HeartShape& s, double f,
                  const double tissue_mean[4], Rng& noise, VolumeGrid& img,
                  LabelMap& lab) {
    int la_rows = static_cast<int>(std::llround(p.slices * p.sz / p.la_row_spacing));
    la_rows = std::max(la_rows, 1);
    int la_cols = p.cols;
    // LA plane passes through the heart center, containing the long axis.
    img = VolumeGrid(1, la_rows, la_cols, p.sx, p.la_row_spacing, 8.0);
    lab = LabelMap(1, la_rows, la_cols, p.sx, p.la_row_spacing, 8.0);
    for (int i = 0; i < la_rows; ++i) {
        double z = i * p.la_row_spacing;
        for (int j = 0; j < la_cols; ++j) {
            double x = j * p.sx;
            uint8_t l = s.label_at(x, s.hy, z, f);
            lab.at(0, i, j) = l;
            img.at(0, i, j) = static_cast<float>(
                tissue_mean[l] + (p.noise_sigma > 0
                                      ? noise.gaussian(0.0, p.noise_sigma)
                                      : 0.0));
        }
    }
}

} // namespace

CardiacStudy generate_phantom(const PhantomParams& params) {
    params.validate();
    Rng rng(params.seed);
    HeartShape shape = make_shape(params, rng);
    const double tissue_mean[4] = {params.mean_bg, params.mean_lv,
                                   params.mean_myo, params.mean_rv};

    CardiacStudy study;
    study.subject_id = "phantom";
    auto build_phase = [&](double f) {
        CardiacStudy::Phase ph;
        LabelMap sa_lab, la_lab;
        rasterize_sa(params, shape, f, tissue_mean, rng, ph.sa_image, sa_lab);
        rasterize_la(params, shape, f, tissue_mean, rng, ph.la_image, la_lab);
        ph.sa_labels = std::move(sa_lab);
        ph.la_labels = std::move(la_lab);
        return ph;
    };
    study.ed = build_phase(params.ed_factor);
    study.es = build_phase(params.es_factor);
    study.validate();
    return study;
}

std::filesystem::path generate_dataset(int n, uint64_t seed,
                                       const fs::path& out_dir,
                                       const PhantomParams& base) {
    if (n < 1) throw ValidationError("subject count must be >= 1");
    base.validate();
    fs::create_directories(out_dir);

    static const char* kPathologies[] = {"NOR", "DLV", "HCM", "ARR",
                                         "TOF", "IAC", "DRV", "TRI"};
    static const char* kVendors[] = {"SIEMENS", "PHILIPS", "GE"};

    std::vector<StudyEntry> entries;
    for (int idx = 0; idx < n; ++idx) {
        PhantomParams p = base;
        p.seed = Rng::substream(seed, static_cast<uint64_t>(idx));
        CardiacStudy study = generate_phantom(p);

        char id[32];
        std::snprintf(id, sizeof(id), "phantom_%03d", idx);
        StudyEntry e;
        e.subject_id = id;
        e.vendor = kVendors[idx % 3];
        e.pathology = kPathologies[idx % 8];
        e.cohort = Cohort::training;

        auto save = [&](const auto& grid, const std::string& stem) {
            std::string name = std::string(id) + "_" + stem + ".nii.gz";
            nifti::save_volume(grid, out_dir / name);
            return name;
        };
        e.sa_ed = save(study.ed.sa_image, "sa_ED");
        e.sa_es = save(study.es.sa_image, "sa_ES");
        e.la_ed = save(study.ed.la_image, "la_ED");
        e.la_es = save(study.es.la_image, "la_ES");
        e.sa_ed_gt = save(*study.ed.sa_labels, "sa_ED_gt");
        e.sa_es_gt = save(*study.es.sa_labels, "sa_ES_gt");
        e.la_ed_gt = save(*study.ed.la_labels, "la_ED_gt");
        e.la_es_gt = save(*study.es.la_labels, "la_ES_gt");
        entries.push_back(std::move(e));
    }

    fs::path manifest = out_dir / "manifest.csv";
    write_manifest(entries, manifest);
    return manifest;
}

} // namespace mvseg
