#include "blockinfer/estimating.hpp"

#include <algorithm>
#include <sstream>

namespace blockinfer {

std::size_t EstimatingSystem::block_index(int r, int k) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (blocks[b] == std::make_pair(r, k)) return b;
    throw std::out_of_range("EstimatingSystem: no block for this (r, k)");
}

namespace {

std::vector<SampleSet> split_pool(const GroupStructure& groups, const SampleSet& pool, const char* name) {
    std::vector<SampleSet> out(static_cast<std::size_t>(groups.n_groups()));
    for (Index i : pool) out[static_cast<std::size_t>(groups.group_of[static_cast<std::size_t>(i)])].push_back(i);
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (out[r].empty()) {
            std::ostringstream os;
            os << "group " << r << " has no sample in the " << name << " pool";
            throw EmptyGroupInPool(os.str());
        }
    }
    return out;
}

Matrix view_rows(const ImputedViews& views, int r, std::size_t t, const SampleSet& rows) {
    std::vector<Index> pos(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) pos[a] = views.position[static_cast<std::size_t>(rows[a])];
    return views.view[static_cast<std::size_t>(r)][t](pos, Eigen::all);
}

}  // namespace

EstimatingSystem build_system(const SemiSupervisedDataset& data, const GroupStructure& groups,
                              const ImputedViews& views, const SampleSet& inference_pool,
                              const SampleSet& projection_pool, const SystemOptions& options) {
    if (inference_pool.empty()) throw std::invalid_argument("build_system: empty inference pool");
    for (Index i : inference_pool)
        if (!data.y_observed[static_cast<std::size_t>(i)])
            throw std::invalid_argument("build_system: inference pool contains an unsupervised sample");

    EstimatingSystem s;
    s.p = groups.p;
    s.inference_pool = inference_pool;
    const int R = groups.n_groups();
    for (int r = 0; r < R; ++r)
        for (int k : groups.sources[static_cast<std::size_t>(r)]) {
            s.blocks.emplace_back(r, k);
            s.full_offset.push_back(s.M_full);
            s.full_size.push_back(static_cast<Index>(groups.observed[static_cast<std::size_t>(k)].size()));
            s.M_full += s.full_size.back();
            s.partial_offset.push_back(s.M_partial);
            s.partial_size.push_back(static_cast<Index>(groups.J(r, k).size()));
            s.M_partial += s.partial_size.back();
        }

    const auto inf = split_pool(groups, inference_pool, "inference");
    s.n = static_cast<Index>(inference_pool.size());
    s.theta_hat.resize(R);
    s.n_pool.resize(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        s.n_pool[static_cast<std::size_t>(r)] = static_cast<Index>(inf[static_cast<std::size_t>(r)].size());
        s.theta_hat(r) = static_cast<double>(s.n_pool[static_cast<std::size_t>(r)]) / static_cast<double>(s.n);
    }

    const Index p = s.p;
    s.q_full = Vector::Zero(s.M_full);
    s.B_full = Matrix::Zero(s.M_full, p);
    if (options.with_partial) {
        s.q_partial = Vector::Zero(s.M_partial);
        s.B_partial = Matrix::Zero(s.M_partial, p);
    }

    std::vector<SampleSet> proj, wpool;
    if (options.with_projection) {
        s.projection_pool = projection_pool;
        s.wn_pool = options.wn_pool == WnPool::Projection ? projection_pool : inference_pool;
        proj = split_pool(groups, projection_pool, "projection");
        wpool = split_pool(groups, s.wn_pool, "W_n");
        s.Gn = Matrix::Zero(s.M_partial, p);
    }

    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        const auto [r, k] = s.blocks[b];
        const auto& src = groups.sources[static_cast<std::size_t>(r)];
        const std::size_t t = static_cast<std::size_t>(std::find(src.begin(), src.end(), k) - src.begin());
        const IndexSet& ak = groups.observed[static_cast<std::size_t>(k)];
        const IndexSet& J = groups.J(r, k);
        const SampleSet& Ir = inf[static_cast<std::size_t>(r)];
        const double inv_nr = 1.0 / static_cast<double>(Ir.size());

        const Matrix xhat = view_rows(views, r, t, Ir);
        const Vector y = data.y(Ir);
        const Matrix xa = xhat(Eigen::all, ak);
        s.q_full.segment(s.full_offset[b], s.full_size[b]).noalias() = (xa.transpose() * y) * inv_nr;
        s.B_full.middleRows(s.full_offset[b], s.full_size[b]).noalias() = (xa.transpose() * xhat) * inv_nr;
        s.full_factors.push_back({s.full_offset[b], xa.transpose() * inv_nr, xhat});

        Matrix xj = data.X(Ir, J);
        if (options.with_partial) {
            s.q_partial.segment(s.partial_offset[b], s.partial_size[b]).noalias() = (xj.transpose() * y) * inv_nr;
            s.B_partial.middleRows(s.partial_offset[b], s.partial_size[b]).noalias() =
                (xj.transpose() * xhat) * inv_nr;
        }
        s.inference_design.push_back(std::move(xj));

        if (options.with_projection) {
            const SampleSet& Pr = proj[static_cast<std::size_t>(r)];
            const Matrix xhat_p = view_rows(views, r, t, Pr);
            const Matrix xj_p = data.X(Pr, J);
            s.Gn.middleRows(s.partial_offset[b], s.partial_size[b]).noalias() =
                (xj_p.transpose() * xhat_p) / static_cast<double>(Pr.size());

            const SampleSet& Wr = wpool[static_cast<std::size_t>(r)];
            const double scale = std::sqrt(static_cast<double>(s.wn_pool.size())) / static_cast<double>(Wr.size());
            const Matrix F = scale * data.X(Wr, J).transpose();
            Matrix block = F * F.transpose();
            s.Wn.push(std::move(block), F.cols() < F.rows() ? F : Matrix());
        }
    }
    return s;
}

Vector eval_g(const EstimatingSystem& s, const Vector& beta, Variant which) {
    if (beta.size() != s.p) throw std::invalid_argument("eval_g: beta length differs from p");
    if (which == Variant::Full) return s.q_full - s.B_full * beta;
    if (s.B_partial.size() == 0 && s.M_partial > 0) throw std::logic_error("eval_g: partial variant was not built");
    return s.q_partial - s.B_partial * beta;
}

}  // namespace blockinfer
