#include "mvseg/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace mvseg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string GeometryRecord::to_json() const {
    json j;
    j["orig_rows"] = orig_rows;
    j["orig_cols"] = orig_cols;
    j["orig_slices"] = orig_slices;
    j["orig_sy"] = orig_sy;
    j["orig_sx"] = orig_sx;
    j["orig_sz"] = orig_sz;
    j["orig_oy"] = orig_oy;
    j["orig_ox"] = orig_ox;
    j["orig_oz"] = orig_oz;
    j["res_rows"] = res_rows;
    j["res_cols"] = res_cols;
    j["crop_row0"] = crop_row0;
    j["crop_col0"] = crop_col0;
    j["pad_row0"] = pad_row0;
    j["pad_col0"] = pad_col0;
    j["target"] = target;
    j["target_spacing"] = target_spacing;
    return j.dump(2);
}

GeometryRecord GeometryRecord::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad geometry record: ") + e.what());
    }
    GeometryRecord r;
    try {
        r.orig_rows = j.at("orig_rows");
        r.orig_cols = j.at("orig_cols");
        r.orig_slices = j.at("orig_slices");
        r.orig_sy = j.at("orig_sy");
        r.orig_sx = j.at("orig_sx");
        r.orig_sz = j.at("orig_sz");
        r.orig_oy = j.at("orig_oy");
        r.orig_ox = j.at("orig_ox");
        r.orig_oz = j.at("orig_oz");
        r.res_rows = j.at("res_rows");
        r.res_cols = j.at("res_cols");
        r.crop_row0 = j.at("crop_row0");
        r.crop_col0 = j.at("crop_col0");
        r.pad_row0 = j.at("pad_row0");
        r.pad_col0 = j.at("pad_col0");
        r.target = j.at("target");
        r.target_spacing = j.at("target_spacing");
    } catch (const json::exception& e) {
        throw FormatError(std::string("incomplete geometry record: ") + e.what());
    }
    return r;
}

void PreprocessedStudy::validate() const {
    for (const PreprocessedPhase* ph : {&ed, &es}) {
        for (const PreprocessedView* v : {&ph->sa, &ph->la}) {
            v->image.validate(subject_id + " preprocessed image");
            if (v->image.rows != kTargetSize || v->image.cols != kTargetSize)
                throw ValidationError(subject_id + ": preprocessed in-plane shape must be 256x256");
            if (v->labels) {
                if (!v->labels->same_geometry(v->image))
                    throw ValidationError(subject_id + ": preprocessed label geometry mismatch");
                for (uint8_t l : v->labels->data)
                    if (l > 2)
                        throw ValidationError(subject_id + ": internal label outside {0,1,2}");
            }
        }
        if (ph->sa.image.slices != ph->la.image.slices)
            throw ValidationError(subject_id + ": SA/LA slice counts differ after replication");
        // LA slices must be identical copies
        const VolumeGrid& la = ph->la.image;
        size_t plane = static_cast<size_t>(la.rows) * la.cols;
        for (int k = 1; k < la.slices; ++k)
            if (!std::equal(la.data.begin(), la.data.begin() + plane,
                            la.data.begin() + k * plane))
                throw ValidationError(subject_id + ": LA slices are not identical");
    }
}

namespace {

template <class T>
Grid<T> resample_impl(const Grid<T>& g, double target, Interp mode) {
    if (!(target > 0.0)) throw ValidationError("target spacing must be positive");
    g.validate("resample input");

    int out_rows = static_cast<int>(std::llround(g.rows * g.sy / target));
    int out_cols = static_cast<int>(std::llround(g.cols * g.sx / target));
    out_rows = std::max(out_rows, 1);
    out_cols = std::max(out_cols, 1);

    if (out_rows == g.rows && out_cols == g.cols && g.sy == target && g.sx == target) {
        Grid<T> out = g;
        return out;
    }

    Grid<T> out(g.slices, out_rows, out_cols, target, target, g.sz);
    out.ox = g.ox;
    out.oy = g.oy;
    out.oz = g.oz;
    out.header_blob = g.header_blob;

    const double ry = target / g.sy;
    const double rx = target / g.sx;

#pragma omp parallel for
    for (int k = 0; k < g.slices; ++k) {
        for (int i = 0; i < out_rows; ++i) {
            double y = i * ry;
            for (int j = 0; j < out_cols; ++j) {
                double x = j * rx;
                if (mode == Interp::nearest) {
                    int yi = std::min(static_cast<int>(std::floor(y + 0.5)), g.rows - 1);
                    int xi = std::min(static_cast<int>(std::floor(x + 0.5)), g.cols - 1);
                    out.at(k, i, j) = g.at(k, std::max(yi, 0), std::max(xi, 0));
                } else {
                    int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, g.rows - 1);
                    int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, g.cols - 1);
                    int y1 = std::min(y0 + 1, g.rows - 1);
                    int x1 = std::min(x0 + 1, g.cols - 1);
                    double fy = std::clamp(y - y0, 0.0, 1.0);
                    double fx = std::clamp(x - x0, 0.0, 1.0);
                    double v00 = g.at(k, y0, x0), v01 = g.at(k, y0, x1);
                    double v10 = g.at(k, y1, x0), v11 = g.at(k, y1, x1);
                    double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                               fy * ((1 - fx) * v10 + fx * v11);
                    out.at(k, i, j) = static_cast<T>(v);
                }
            }
        }
    }
    return out;
}

template <class T>
std::pair<Grid<T>, GeometryRecord> crop_or_pad_impl(const Grid<T>& g, int target) {
    if (target < 1) throw ValidationError("crop/pad target must be >= 1");
    g.validate("crop_or_pad input");

    GeometryRecord rec;
    rec.res_rows = g.rows;
    rec.res_cols = g.cols;
    rec.target = target;

    Grid<T> out(g.slices, target, target, g.sx, g.sy, g.sz);
    out.ox = g.ox;
    out.oy = g.oy;
    out.oz = g.oz;
    out.header_blob = g.header_blob;

    int src_row0 = 0, dst_row0 = 0, copy_rows;
    if (g.rows >= target) {
        src_row0 = (g.rows - target) / 2;
        rec.crop_row0 = src_row0;
        copy_rows = target;
    } else {
        dst_row0 = (target - g.rows) / 2;
        rec.pad_row0 = dst_row0;
        copy_rows = g.rows;
    }
    int src_col0 = 0, dst_col0 = 0, copy_cols;
    if (g.cols >= target) {
        src_col0 = (g.cols - target) / 2;
        rec.crop_col0 = src_col0;
        copy_cols = target;
    } else {
        dst_col0 = (target - g.cols) / 2;
        rec.pad_col0 = dst_col0;
        copy_cols = g.cols;
    }

#pragma omp parallel for
    for (int k = 0; k < g.slices; ++k)
        for (int i = 0; i < copy_rows; ++i) {
            const T* src = &g.at(k, src_row0 + i, src_col0);
            T* dst = &out.at(k, dst_row0 + i, dst_col0);
            std::copy(src, src + copy_cols, dst);
        }
    return {std::move(out), rec};
}

template <class T>
Grid<T> replicate_impl(const Grid<T>& la, int n_slices, double sa_sz) {
    if (n_slices < 1) throw ValidationError("replication count must be >= 1");
    if (la.slices != 1)
        throw ValidationError("LA volume must have exactly one slice before replication");
    la.validate("replicate input");

    Grid<T> out(n_slices, la.rows, la.cols, la.sx, la.sy, sa_sz);
    out.ox = la.ox;
    out.oy = la.oy;
    out.oz = la.oz;
    out.header_blob = la.header_blob;
    size_t plane = static_cast<size_t>(la.rows) * la.cols;
    for (int k = 0; k < n_slices; ++k)
        std::copy(la.data.begin(), la.data.end(), out.data.begin() + k * plane);
    return out;
}

} // namespace

VolumeGrid resample_inplane(const VolumeGrid& grid, double target_spacing, Interp mode) {
    return resample_impl(grid, target_spacing, mode);
}

LabelMap resample_inplane(const LabelMap& grid, double target_spacing, Interp mode) {
    if (mode != Interp::nearest)
        throw ValidationError("label maps must be resampled with nearest mode");
    return resample_impl(grid, target_spacing, mode);
}

std::pair<VolumeGrid, GeometryRecord> crop_or_pad(const VolumeGrid& grid, int target) {
    return crop_or_pad_impl(grid, target);
}
std::pair<LabelMap, GeometryRecord> crop_or_pad(const LabelMap& grid, int target) {
    return crop_or_pad_impl(grid, target);
}

VolumeGrid zscore(const VolumeGrid& grid) {
    grid.validate("zscore input");
    double sum = 0.0;
    for (float v : grid.data) sum += v;
    double mean = sum / grid.data.size();
    double ss = 0.0;
    for (float v : grid.data) {
        double d = v - mean;
        ss += d * d;
    }
    double sigma = std::sqrt(ss / grid.data.size());
    if (sigma == 0.0)
        throw DegenerateInputError("constant volume has zero variance");

    VolumeGrid out = grid;
    float m = static_cast<float>(mean);
    float inv = static_cast<float>(1.0 / sigma);
    for (float& v : out.data) v = (v - m) * inv;
    return out;
}

VolumeGrid replicate_la(const VolumeGrid& la, int n_slices, double sa_slice_spacing) {
    return replicate_impl(la, n_slices, sa_slice_spacing);
}
LabelMap replicate_la(const LabelMap& la, int n_slices, double sa_slice_spacing) {
    return replicate_impl(la, n_slices, sa_slice_spacing);
}

LabelMap remap_labels(const LabelMap& labels) {
    static constexpr uint8_t kMap[4] = {0, 1, 1, 2};
    LabelMap out = labels;
    for (uint8_t& v : out.data) {
        if (v > 3)
            throw ValidationError("label value " + std::to_string(v) +
                                  " outside challenge set {0,1,2,3}");
        v = kMap[v];
    }
    return out;
}

namespace {

GeometryRecord fill_orig(GeometryRecord rec, const VolumeGrid& orig) {
    rec.orig_rows = orig.rows;
    rec.orig_cols = orig.cols;
    rec.orig_slices = orig.slices;
    rec.orig_sy = orig.sy;
    rec.orig_sx = orig.sx;
    rec.orig_sz = orig.sz;
    rec.orig_oy = orig.oy;
    rec.orig_ox = orig.ox;
    rec.orig_oz = orig.oz;
    return rec;
}

VolumeGrid zscore_or_zero(VolumeGrid g, const std::string& what) {
    try {
        return zscore(g);
    } catch (const DegenerateInputError&) {
        std::cerr << "warning: " << what
                  << " is constant; normalized volume set to all-zeros\n";
        std::fill(g.data.begin(), g.data.end(), 0.0f);
        return g;
    }
}

PreprocessedView preprocess_sa(const VolumeGrid& img,
                               const std::optional<LabelMap>& lab,
                               const std::string& what) {
    PreprocessedView v;
    VolumeGrid res = resample_inplane(img, kTargetSpacingMm, Interp::linear);
    auto [cropped, rec] = crop_or_pad(res, kTargetSize);
    v.geom = fill_orig(rec, img);
    v.image = zscore_or_zero(std::move(cropped), what);
    if (lab) {
        LabelMap lres = resample_inplane(*lab, kTargetSpacingMm, Interp::nearest);
        auto [lcropped, lrec] = crop_or_pad(lres, kTargetSize);
        (void)lrec; // same geometry as the image by construction
        v.labels = remap_labels(lcropped);
    }
    return v;
}

PreprocessedView preprocess_la(const VolumeGrid& img,
                               const std::optional<LabelMap>& lab,
                               int sa_slices, double sa_sz,
                               const std::string& what) {
    PreprocessedView v;
    VolumeGrid res = resample_inplane(img, kTargetSpacingMm, Interp::linear);
    auto [cropped, rec] = crop_or_pad(res, kTargetSize);
    v.geom = fill_orig(rec, img);
    VolumeGrid replicated = replicate_la(cropped, sa_slices, sa_sz);
    v.image = zscore_or_zero(std::move(replicated), what);
    if (lab) {
        LabelMap lres = resample_inplane(*lab, kTargetSpacingMm, Interp::nearest);
        auto [lcropped, lrec] = crop_or_pad(lres, kTargetSize);
        (void)lrec;
        v.labels = replicate_la(remap_labels(lcropped), sa_slices, sa_sz);
    }
    return v;
}

PreprocessedPhase preprocess_phase(const CardiacStudy::Phase& ph,
                                   const std::string& subject,
                                   const char* phase_name) {
    if (ph.la_image.slices != 1)
        throw ValidationError(subject + ": LA image must have exactly one slice");
    PreprocessedPhase out;
    out.sa = preprocess_sa(ph.sa_image, ph.sa_labels,
                           subject + " SA " + phase_name);
    out.la = preprocess_la(ph.la_image, ph.la_labels, ph.sa_image.slices,
                           ph.sa_image.sz, subject + " LA " + phase_name);
    return out;
}

} // namespace

PreprocessedStudy preprocess_study(const CardiacStudy& study) {
    study.validate();
    PreprocessedStudy out;
    out.subject_id = study.subject_id;
    out.pathology = study.pathology;
    out.ed = preprocess_phase(study.ed, study.subject_id, "ED");
    out.es = preprocess_phase(study.es, study.subject_id, "ES");
    out.validate();
    return out;
}

LabelMap invert_geometry(const LabelMap& labels, const GeometryRecord& rec) {
    labels.validate("invert_geometry input");
    if (labels.rows != rec.target || labels.cols != rec.target)
        throw ValidationError("label shape does not match geometry record target");

    // Undo crop/pad: re-embed into the resampled grid.
    LabelMap res(labels.slices, rec.res_rows, rec.res_cols, rec.target_spacing,
                 rec.target_spacing, rec.orig_sz);
    int copy_rows = std::min(rec.res_rows, rec.target);
    int copy_cols = std::min(rec.res_cols, rec.target);
    for (int k = 0; k < labels.slices; ++k)
        for (int i = 0; i < copy_rows; ++i)
            for (int j = 0; j < copy_cols; ++j)
                res.at(k, rec.crop_row0 + i, rec.crop_col0 + j) =
                    labels.at(k, rec.pad_row0 + i, rec.pad_col0 + j);

    // Undo resampling: nearest map back to the original in-plane grid.
    LabelMap out(labels.slices, rec.orig_rows, rec.orig_cols, rec.orig_sx,
                 rec.orig_sy, rec.orig_sz);
    out.ox = rec.orig_ox;
    out.oy = rec.orig_oy;
    out.oz = rec.orig_oz;
    const double ry = rec.orig_sy / rec.target_spacing;
    const double rx = rec.orig_sx / rec.target_spacing;
#pragma omp parallel for
    for (int k = 0; k < out.slices; ++k)
        for (int i = 0; i < out.rows; ++i) {
            int yi = std::clamp(static_cast<int>(std::floor(i * ry + 0.5)), 0,
                                rec.res_rows - 1);
            for (int j = 0; j < out.cols; ++j) {
                int xi = std::clamp(static_cast<int>(std::floor(j * rx + 0.5)), 0,
                                    rec.res_cols - 1);
                out.at(k, i, j) = res.at(k, yi, xi);
            }
        }
    return out;
}

namespace {

void save_view(const PreprocessedView& v, const fs::path& dir,
               const std::string& stem) {
    nifti::save_volume(v.image, dir / (stem + ".nii.gz"));
    if (v.labels) nifti::save_volume(*v.labels, dir / (stem + "_gt.nii.gz"));
    std::ofstream f(dir / (stem + "_geom.json"), std::ios::trunc);
    if (!f) throw IoError("cannot write geometry sidecar in " + dir.string());
    f << v.geom.to_json() << '\n';
}

PreprocessedView load_view(const fs::path& dir, const std::string& stem) {
    PreprocessedView v;
    v.image = nifti::load_image(dir / (stem + ".nii.gz"));
    fs::path gt = dir / (stem + "_gt.nii.gz");
    if (fs::exists(gt)) v.labels = nifti::load_labels(gt);
    std::ifstream f(dir / (stem + "_geom.json"));
    if (!f) throw NotFoundError("missing geometry sidecar: " +
                                (dir / (stem + "_geom.json")).string());
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    v.geom = GeometryRecord::from_json(text);
    return v;
}

} // namespace

void save_preprocessed(const PreprocessedStudy& study, const fs::path& dir) {
    study.validate();
    fs::create_directories(dir);
    save_view(study.ed.sa, dir, "sa_ED");
    save_view(study.ed.la, dir, "la_ED");
    save_view(study.es.sa, dir, "sa_ES");
    save_view(study.es.la, dir, "la_ES");
    json meta;
    meta["subject_id"] = study.subject_id;
    meta["pathology"] = study.pathology;
    meta["slices"] = study.ed.sa.image.slices;
    std::ofstream f(dir / "study.json", std::ios::trunc);
    if (!f) throw IoError("cannot write study metadata in " + dir.string());
    f << meta.dump(2) << '\n';
}

PreprocessedStudy load_preprocessed(const fs::path& dir, const std::string& subject_id) {
    if (!fs::exists(dir / "study.json"))
        throw NotFoundError("no preprocessed study at " + dir.string());
    std::ifstream f(dir / "study.json");
    json meta = json::parse(std::string((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>()));
    PreprocessedStudy s;
    s.subject_id = meta.value("subject_id", subject_id);
    s.pathology = meta.value("pathology", "");
    s.ed.sa = load_view(dir, "sa_ED");
    s.ed.la = load_view(dir, "la_ED");
    s.es.sa = load_view(dir, "sa_ES");
    s.es.la = load_view(dir, "la_ES");
    s.validate();
    return s;
}

} // namespace mvseg
