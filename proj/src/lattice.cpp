#include "lattice_internal.hpp"

#include "bmp/motions.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace bmp {

namespace {

using Site = std::vector<std::int32_t>;

Site site_at(const LatticeConfig& c, std::size_t i) {
    const auto d = static_cast<std::size_t>(c.dim);
    return Site(c.coords.begin() + static_cast<std::ptrdiff_t>(i * d),
                c.coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
}

std::vector<Site> sites_of(const LatticeConfig& c) {
    std::vector<Site> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out.push_back(site_at(c, i));
    return out;
}

// Sites of a canonical config are sorted, so membership is a binary search.
bool infected(const std::vector<Site>& sorted_sites, const Site& x) {
    return std::binary_search(sorted_sites.begin(), sorted_sites.end(), x);
}

std::vector<std::int32_t> flatten(const std::vector<Site>& sites) {
    std::vector<std::int32_t> out;
    for (const auto& s : sites) out.insert(out.end(), s.begin(), s.end());
    return out;
}

template <typename Fn>
void for_each_boundary_pair(const std::vector<Site>& sites, int dim, Fn&& fn) {
    for (const auto& y : sites) {
        for (int k = 0; k < dim; ++k) {
            for (int sgn : {-1, 1}) {
                Site x = y;
                x[static_cast<std::size_t>(k)] += sgn;
                if (!infected(sites, x)) fn(x);
            }
        }
    }
}

}  // namespace

State canonicalize(int dim, std::vector<std::int32_t> coords) {
    if (dim < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    const auto d = static_cast<std::size_t>(dim);
    if (coords.size() % d != 0) throw std::invalid_argument("coordinate list is not a multiple of the dimension");
    if (coords.empty()) return Absorbed{};

    const std::size_t n = coords.size() / d;
    Site lo(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(d));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) lo[k] = std::min(lo[k], coords[i * d + k]);

    std::vector<Site> sites(n, Site(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) sites[i][k] = coords[i * d + k] - lo[k];
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    return LatticeConfig{dim, flatten(sites)};
}

std::vector<Transition> contact_event_rates(const LatticeConfig& config, double gamma) {
    if (config.size() == 0) throw std::invalid_argument("contact configuration must be nonempty");
    const auto sites = sites_of(config);
    std::map<State, double> merged;

    for (std::size_t i = 0; i < sites.size(); ++i) {
        std::vector<Site> rest;
        rest.reserve(sites.size() - 1);
        for (std::size_t j = 0; j < sites.size(); ++j)
            if (j != i) rest.push_back(sites[j]);
        merged[canonicalize(config.dim, flatten(rest))] += 1.0;
    }
    for_each_boundary_pair(sites, config.dim, [&](const Site& x) {
        auto grown = sites;
        grown.push_back(x);
        merged[canonicalize(config.dim, flatten(grown))] += gamma;
    });

    std::vector<Transition> out;
    out.reserve(merged.size());
    for (auto& [next, rate] : merged) out.push_back({next, rate});
    return out;
}

std::vector<Transition> gw_event_rates(std::int64_t n, const std::vector<GaltonWatson::Jump>& rho) {
    if (n < 1) throw std::invalid_argument("Galton-Watson rates need n >= 1");
    std::vector<Transition> out;
    for (const auto& j : rho) {
        if (j.prob <= 0.0) continue;
        out.push_back({make_count(n + j.y), static_cast<double>(n) * j.prob});
    }
    return out;
}

namespace detail {

std::size_t contact_boundary_pairs(const LatticeConfig& config) {
    const auto sites = sites_of(config);
    std::size_t count = 0;
    for_each_boundary_pair(sites, config.dim, [&](const Site&) { ++count; });
    return count;
}

State contact_jump(const LatticeConfig& config, double gamma, RandomStream& rng) {
    auto sites = sites_of(config);
    std::vector<Site> boundary;
    for_each_boundary_pair(sites, config.dim, [&](const Site& x) { boundary.push_back(x); });
    const double recover = static_cast<double>(sites.size());
    const double total = recover + gamma * static_cast<double>(boundary.size());
    if (rng.uniform() * total < recover) {
        sites.erase(sites.begin() + static_cast<std::ptrdiff_t>(rng.index(sites.size())));
    } else {
        sites.push_back(boundary[rng.index(boundary.size())]);
    }
    return canonicalize(config.dim, flatten(sites));
}

}  // namespace detail

}  // namespace bmp
