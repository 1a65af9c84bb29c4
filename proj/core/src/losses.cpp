#include "dsreg/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dsreg {

namespace {

// Truncated box sum along one axis (window [-r, r] clipped to the grid),
// computed with a sliding window per line.
void box_pass(const std::vector<double>& in, std::vector<double>& out, const Dims& d,
              int axis, int radius) {
    const int n[3] = {d.nx, d.ny, d.nz};
    const std::size_t stride[3] = {1, std::size_t(d.nx), std::size_t(d.nx) * d.ny};
    const int len = n[axis];
    const std::size_t s = stride[axis];

    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int q = 0; q < n[a2]; ++q)
        for (int p = 0; p < n[a1]; ++p) {
            const std::size_t base = std::size_t(p) * stride[a1] + std::size_t(q) * stride[a2];
            double acc = 0.0;
            const int warm = std::min(radius, len - 1);
            for (int t = 0; t <= warm; ++t) acc += in[base + std::size_t(t) * s];
            for (int x = 0; x < len; ++x) {
                out[base + std::size_t(x) * s] = acc;
                const int add = x + radius + 1;
                const int drop = x - radius;
                if (add < len) acc += in[base + std::size_t(add) * s];
                if (drop >= 0) acc -= in[base + std::size_t(drop) * s];
            }
        }
}

std::vector<double> box_sum(const std::vector<double>& in, const Dims& d, int radius) {
    std::vector<double> a(in.size()), b(in.size());
    box_pass(in, a, d, 0, radius);
    box_pass(a, b, d, 1, radius);
    box_pass(b, a, d, 2, radius);
    return a;
}

int axis_count(int x, int n, int r) {
    return std::min(n - 1, x + r) - std::max(0, x - r) + 1;
}

void check_same_dims(const Dims& a, const Dims& b, const char* who) {
    if (!(a == b)) throw std::invalid_argument(std::string(who) + ": dims mismatch");
}

struct SsimStats {
    std::vector<double> sa, sb, saa, sbb, sab;
    Dims d;
    int r;

    SsimStats(const Volume3& a, const Volume3& b, int radius) : d(a.dims), r(radius) {
        const std::size_t n = a.data.size();
        std::vector<double> tmp(n);
        sa = box_sum(a.data, d, r);
        sb = box_sum(b.data, d, r);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = a.data[i] * a.data[i];
        saa = box_sum(tmp, d, r);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = b.data[i] * b.data[i];
        sbb = box_sum(tmp, d, r);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = a.data[i] * b.data[i];
        sab = box_sum(tmp, d, r);
    }
};

} // namespace

double ssim_index(const Volume3& a, const Volume3& b, const SsimParams& params) {
    check_same_dims(a.dims, b.dims, "ssim_index");
    if (params.window_radius < 1) throw std::invalid_argument("ssim: window_radius must be >= 1");
    if (!(params.c1 > 0.0) || !(params.c2 > 0.0))
        throw std::invalid_argument("ssim: C1, C2 must be positive");

    SsimStats st(a, b, params.window_radius);
    const Dims d = a.dims;
    double sum = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i, ++n) {
                const double cnt = double(axis_count(i, d.nx, st.r)) *
                                   axis_count(j, d.ny, st.r) * axis_count(k, d.nz, st.r);
                const double mua = st.sa[n] / cnt, mub = st.sb[n] / cnt;
                const double va = st.saa[n] / cnt - mua * mua;
                const double vb = st.sbb[n] / cnt - mub * mub;
                const double cov = st.sab[n] / cnt - mua * mub;
                const double a1 = 2 * mua * mub + params.c1, a2 = 2 * cov + params.c2;
                const double b1 = mua * mua + mub * mub + params.c1, b2 = va + vb + params.c2;
                sum += (a1 * a2) / (b1 * b2);
            }
    return sum / double(d.voxels());
}

LossValueGrad ssim_loss(const Volume3& a, const Volume3& b, const SsimParams& params) {
    check_same_dims(a.dims, b.dims, "ssim_loss");
    if (params.window_radius < 1) throw std::invalid_argument("ssim: window_radius must be >= 1");
    if (!(params.c1 > 0.0) || !(params.c2 > 0.0))
        throw std::invalid_argument("ssim: C1, C2 must be positive");

    SsimStats st(a, b, params.window_radius);
    const Dims d = a.dims;
    const std::size_t nvox = d.voxels();

    // Per-window coefficients of dS/db_j = u + v*a_j + w*b_j for j in the
    // window; the scatter over windows is the same truncated box sum.
    std::vector<double> cu(nvox), cv(nvox), cw(nvox);
    double sum = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i, ++n) {
                const double cnt = double(axis_count(i, d.nx, st.r)) *
                                   axis_count(j, d.ny, st.r) * axis_count(k, d.nz, st.r);
                const double mua = st.sa[n] / cnt, mub = st.sb[n] / cnt;
                const double va = st.saa[n] / cnt - mua * mua;
                const double vb = st.sbb[n] / cnt - mub * mub;
                const double cov = st.sab[n] / cnt - mua * mub;
                const double a1 = 2 * mua * mub + params.c1, a2 = 2 * cov + params.c2;
                const double b1 = mua * mua + mub * mub + params.c1, b2 = va + vb + params.c2;
                const double s = (a1 * a2) / (b1 * b2);
                sum += s;

                const double ib = 1.0 / (b1 * b2);
                cu[n] = (2 * mua * a2 * ib - 2 * a1 * mua * ib - 2 * s * mub / b1 +
                         2 * s * mub / b2) /
                        cnt;
                cv[n] = 2 * a1 * ib / cnt;
                cw[n] = -2 * s / b2 / cnt;
            }

    const auto su = box_sum(cu, d, st.r);
    const auto sv = box_sum(cv, d, st.r);
    const auto sw = box_sum(cw, d, st.r);

    LossValueGrad out;
    out.value = 1.0 - sum / double(nvox);
    out.grad.resize(nvox);
    const double inv_n = 1.0 / double(nvox);
    for (std::size_t m = 0; m < nvox; ++m)
        out.grad[m] = -inv_n * (su[m] + a.data[m] * sv[m] + b.data[m] * sw[m]);
    return out;
}

LossValueGrad mse_loss(const Volume3& a, const Volume3& b) {
    check_same_dims(a.dims, b.dims, "mse_loss");
    const std::size_t n = a.data.size();
    LossValueGrad out;
    out.grad.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = b.data[i] - a.data[i];
        sum += diff * diff;
        out.grad[i] = 2.0 * diff / double(n);
    }
    out.value = sum / double(n);
    return out;
}

LossValueGrad mind_l1_loss(const MindVolume& ma, const MindVolume& mb) {
    check_same_dims(ma.dims, mb.dims, "mind_l1_loss");
    const std::size_t n = ma.data.size();
    const double norm = 1.0 / double(ma.dims.voxels() * MindVolume::kChannels);
    LossValueGrad out;
    out.grad.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = mb.data[i] - ma.data[i];
        sum += std::abs(diff);
        out.grad[i] = diff > 0.0 ? norm : (diff < 0.0 ? -norm : 0.0);
    }
    out.value = sum * norm;
    return out;
}

LossValueGrad smoothness_loss(const DisplacementField& field) {
    const Dims d = field.dims;
    if (d.nx < 2 || d.ny < 2 || d.nz < 2)
        throw std::invalid_argument("smoothness_loss: dims must be >= 2 per axis");

    const std::size_t terms =
        3 * (std::size_t(d.nx - 1) * d.ny * d.nz + std::size_t(d.nx) * (d.ny - 1) * d.nz +
             std::size_t(d.nx) * d.ny * (d.nz - 1));
    const double inv = 1.0 / double(terms);

    LossValueGrad out;
    out.grad.assign(field.data.size(), 0.0);
    double sum = 0.0;
    const int step[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int axis = 0; axis < 3; ++axis) {
        for (int k = 0; k + step[axis][2] < d.nz; ++k)
            for (int j = 0; j + step[axis][1] < d.ny; ++j)
                for (int i = 0; i + step[axis][0] < d.nx; ++i)
                    for (int c = 0; c < 3; ++c) {
                        const std::size_t n0 = field.index(i, j, k, c);
                        const std::size_t n1 = field.index(i + step[axis][0], j + step[axis][1],
                                                           k + step[axis][2], c);
                        const double diff = field.data[n1] - field.data[n0];
                        sum += diff * diff;
                        out.grad[n1] += 2.0 * diff * inv;
                        out.grad[n0] -= 2.0 * diff * inv;
                    }
    }
    out.value = sum * inv;
    return out;
}

double identity_translation_loss(const Translator& t, const Volume3& same_domain) {
    const Volume3 mapped = t.apply(same_domain);
    double sum = 0.0;
    for (std::size_t i = 0; i < same_domain.data.size(); ++i)
        sum += std::abs(mapped.data[i] - same_domain.data[i]);
    return sum / double(same_domain.data.size());
}

double cycle_consistency_loss(const Translator& fwd, const Translator& bwd,
                              const Volume3& vol) {
    const Volume3 cycled = bwd.apply(fwd.apply(vol));
    double sum = 0.0;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        sum += std::abs(cycled.data[i] - vol.data[i]);
    return sum / double(vol.data.size());
}

std::string TranslationScore::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "cycle_ct = " << cycle_ct << "\n";
    os << "cycle_mr = " << cycle_mr << "\n";
    os << "cycle = " << cycle << "\n";
    os << "identity_mr = " << identity_mr << "\n";
    os << "identity_ct = " << identity_ct << "\n";
    os << "identity = " << identity << "\n";
    os << "mind_ct = " << mind_ct << "\n";
    os << "mind_mr = " << mind_mr << "\n";
    os << "mind = " << mind << "\n";
    os << "weighted_total = " << weighted_total << "\n";
    os << "adversarial_d_mr = not_computed\n";
    os << "adversarial_d_ct = not_computed\n";
    return os.str();
}

TranslationScore translation_score(const Translator& fwd, const Translator& bwd,
                                   const std::vector<Volume3>& ct_vols,
                                   const std::vector<Volume3>& mr_vols,
                                   const TranslationLossWeights& weights,
                                   const MindParams& mind_params) {
    if (ct_vols.empty() || mr_vols.empty())
        throw std::invalid_argument("translation_score: need at least one volume per domain");
    if (weights.cyc < 0.0 || weights.identity < 0.0 || weights.mind < 0.0)
        throw std::invalid_argument("translation_score: weights must be nonnegative");

    TranslationScore s;
    for (const auto& ct : ct_vols) {
        s.cycle_ct += cycle_consistency_loss(fwd, bwd, ct);
        s.identity_ct += identity_translation_loss(bwd, ct);
        s.mind_ct += mind_l1_loss(mind(ct, mind_params), mind(fwd.apply(ct), mind_params)).value;
    }
    for (const auto& mr : mr_vols) {
        s.cycle_mr += cycle_consistency_loss(bwd, fwd, mr);
        s.identity_mr += identity_translation_loss(fwd, mr);
        s.mind_mr += mind_l1_loss(mind(mr, mind_params), mind(bwd.apply(mr), mind_params)).value;
    }
    s.cycle_ct /= double(ct_vols.size());
    s.identity_ct /= double(ct_vols.size());
    s.mind_ct /= double(ct_vols.size());
    s.cycle_mr /= double(mr_vols.size());
    s.identity_mr /= double(mr_vols.size());
    s.mind_mr /= double(mr_vols.size());

    s.cycle = s.cycle_ct + s.cycle_mr;
    s.identity = s.identity_ct + s.identity_mr;
    s.mind = s.mind_ct + s.mind_mr;
    s.weighted_total = weights.cyc * s.cycle + weights.identity * s.identity + weights.mind * s.mind;
    return s;
}

} // namespace dsreg
