#include "blockinfer/core_data.hpp"

#include <algorithm>
#include <sstream>

namespace blockinfer {

SampleSet SemiSupervisedDataset::supervised() const {
    SampleSet out;
    for (std::size_t i = 0; i < y_observed.size(); ++i)
        if (y_observed[i]) out.push_back(static_cast<Index>(i));
    return out;
}

SampleSet SemiSupervisedDataset::unsupervised() const {
    SampleSet out;
    for (std::size_t i = 0; i < y_observed.size(); ++i)
        if (!y_observed[i]) out.push_back(static_cast<Index>(i));
    return out;
}

SampleSet SemiSupervisedDataset::all_samples() const {
    SampleSet out(static_cast<std::size_t>(n_samples()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Index>(i);
    return out;
}

const IndexSet& GroupStructure::J(int r, int k) const {
    auto it = overlap.find({r, k});
    if (it == overlap.end()) {
        std::ostringstream os;
        os << "group " << k << " is not an imputation source of group " << r;
        throw std::out_of_range(os.str());
    }
    return it->second;
}

GroupStructure derive_groups(const SemiSupervisedDataset& data) {
    const Index n = data.n_samples();
    const Index p = data.n_covariates();
    GroupStructure g;
    g.p = p;
    g.group_of.assign(static_cast<std::size_t>(n), -1);

    std::map<std::vector<bool>, int> label_of_mask;
    for (Index i = 0; i < n; ++i) {
        std::vector<bool> key(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j) key[static_cast<std::size_t>(j)] = data.missing(i, j);
        auto [it, inserted] = label_of_mask.try_emplace(key, g.n_groups());
        if (inserted) {
            IndexSet a, m;
            for (Index j = 0; j < p; ++j) (key[static_cast<std::size_t>(j)] ? m : a).push_back(j);
            g.observed.push_back(std::move(a));
            g.missing.push_back(std::move(m));
            g.members.emplace_back();
            g.n_supervised.push_back(0);
            g.n_unsupervised.push_back(0);
        }
        const int r = it->second;
        g.group_of[static_cast<std::size_t>(i)] = r;
        g.members[static_cast<std::size_t>(r)].push_back(i);
        const bool sup = static_cast<std::size_t>(i) < data.y_observed.size() &&
                         data.y_observed[static_cast<std::size_t>(i)];
        (sup ? g.n_supervised : g.n_unsupervised)[static_cast<std::size_t>(r)]++;
    }

    const int R = g.n_groups();
    for (Index j = 0; j < p; ++j) {
        bool seen = false;
        for (int r = 0; r < R && !seen; ++r)
            seen = std::binary_search(g.observed[r].begin(), g.observed[r].end(), j);
        if (!seen) {
            std::ostringstream os;
            os << "covariate " << j << " is missing in every group";
            throw NeverObservedCovariate(os.str());
        }
    }

    g.sources.resize(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        if (g.missing[r].empty()) {
            g.sources[r] = {r};
            g.overlap[{r, r}] = g.observed[r];
            continue;
        }
        for (int k = 0; k < R; ++k) {
            if (k == r || !is_subset(g.missing[r], g.observed[k])) continue;
            IndexSet shared = set_intersection(g.observed[r], g.observed[k]);
            if (shared.empty()) continue;
            g.sources[r].push_back(k);
            g.overlap[{r, k}] = std::move(shared);
        }
        if (g.sources[r].empty()) {
            std::ostringstream os;
            os << "group " << r << " has no group observing all of its missing covariates"
               << " together with a shared covariate";
            throw EmptySourceSet(os.str());
        }
    }
    return g;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationFailure(what); }

}  // namespace

void validate(const SemiSupervisedDataset& d, const GroupStructure& g) {
    const Index n = d.n_samples();
    const Index p = d.n_covariates();
    if (d.missing.rows() != n || d.missing.cols() != p) fail("missing mask shape differs from X");
    if (d.y.size() != n || static_cast<Index>(d.y_observed.size()) != n)
        fail("response length differs from sample count");
    if (!d.sample_ids.empty() && static_cast<Index>(d.sample_ids.size()) != n)
        fail("sample_ids length differs from sample count");
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j)
            if (!d.missing(i, j) && !std::isfinite(d.X(i, j))) fail("X is non-finite at an observed entry");
    Index n2 = 0;
    for (Index i = 0; i < n; ++i) {
        if (!d.y_observed[static_cast<std::size_t>(i)]) continue;
        ++n2;
        if (!std::isfinite(d.y(i))) fail("observed response is non-finite");
    }
    if (n2 < 1) fail("no supervised samples (|D2| >= 1)");
    for (Index j = 0; j < p; ++j) {
        bool seen = false;
        for (Index i = 0; i < n && !seen; ++i) seen = !d.missing(i, j);
        if (!seen) fail("a covariate is never observed");
    }

    const int R = g.n_groups();
    if (g.p != p) fail("group structure dimension differs from dataset");
    if (static_cast<Index>(g.group_of.size()) != n) fail("group_of length differs from sample count");
    if (g.missing.size() != g.observed.size() || g.members.size() != g.observed.size() ||
        g.sources.size() != g.observed.size() || g.n_supervised.size() != g.observed.size() ||
        g.n_unsupervised.size() != g.observed.size())
        fail("per-group tables have inconsistent lengths");
    for (Index i = 0; i < n; ++i) {
        const int r = g.group_of[static_cast<std::size_t>(i)];
        if (r < 0 || r >= R) fail("group_of maps a sample outside [0, R)");
    }

    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < R; ++r) {
        Index sup = 0;
        for (Index i : g.members[r]) {
            if (i < 0 || i >= n) fail("H(r) contains an out-of-range sample");
            if (g.group_of[static_cast<std::size_t>(i)] != r) fail("H(r) disagrees with group_of");
            seen[static_cast<std::size_t>(i)]++;
            if (d.y_observed[static_cast<std::size_t>(i)]) ++sup;
            for (Index j = 0; j < p; ++j) {
                const bool obs = std::binary_search(g.observed[r].begin(), g.observed[r].end(), j);
                if (obs == d.missing(i, j)) fail("a sample's mask disagrees with a(r)");
            }
        }
        if (sup != g.n_supervised[r] ||
            static_cast<Index>(g.members[r].size()) - sup != g.n_unsupervised[r])
            fail("n_r / N_r disagree with H(r)");
        if (!std::is_sorted(g.observed[r].begin(), g.observed[r].end()) ||
            !std::is_sorted(g.missing[r].begin(), g.missing[r].end()))
            fail("a(r) or m(r) is not sorted");
        IndexSet complement;
        for (Index j = 0; j < p; ++j)
            if (!std::binary_search(g.observed[r].begin(), g.observed[r].end(), j)) complement.push_back(j);
        if (complement != g.missing[r]) fail("m(r) is not the complement of a(r)");
        if (g.sources[r].empty()) fail("|G(r)| >= 1 violated");
        for (int k : g.sources[r]) {
            if (k < 0 || k >= R) fail("G(r) contains an out-of-range group");
            auto it = g.overlap.find({r, k});
            if (it == g.overlap.end()) fail("J(r,k) missing for k in G(r)");
            const IndexSet& J = it->second;
            if (J != set_intersection(g.observed[r], g.observed[k])) fail("J(r,k) != a(r) ∩ a(k)");
            if (!is_subset(J, g.observed[k])) fail("J(r,k) is not a subset of a(k)");
            if (!g.missing[r].empty()) {
                if (!is_subset(g.missing[r], g.observed[k])) fail("m(r) is not a subset of a(k)");
                if (J.empty()) fail("J(r,k) is empty");
            }
        }
    }
    for (Index i = 0; i < n; ++i)
        if (seen[static_cast<std::size_t>(i)] != 1) fail("H(r) sets do not partition the samples");
}

SampleSet pool_members(const GroupStructure& groups, const SampleSet& pool, int r) {
    SampleSet out;
    for (Index i : pool)
        if (groups.group_of[static_cast<std::size_t>(i)] == r) out.push_back(i);
    return out;
}

}  // namespace blockinfer
