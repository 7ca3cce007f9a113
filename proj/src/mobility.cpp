#include "uavnoma/mobility.hpp"

#include <cmath>
#include <numbers>

namespace uavnoma {

namespace {

constexpr std::uint32_t kSizeStreamTag = 0x5153u;

struct ActiveUser {
    int id = 0;
    Vec2 pos;
    Rng rng;
};

}  // namespace

const std::array<double, 8>& MobilityConfig::directions() {
    static const std::array<double, 8> dirs = [] {
        std::array<double, 8> d{};
        for (int k = 0; k < 8; ++k) d[k] = k * std::numbers::pi / 4.0;
        return d;
    }();
    return dirs;
}

MobilityConfig MobilityConfig::from(const ScenarioConfig& cfg, double v1, double v2, double lambda) {
    MobilityConfig m;
    m.speed_min = v1;
    m.speed_max = v2;
    m.coverage_radius = cfg.coverage_radius;
    m.lambda = lambda;
    m.slot_duration = cfg.slot_duration();
    return m;
}

void MobilityConfig::validate() const {
    if (!(speed_min >= 0.0) || !(speed_max >= speed_min))
        throw ScenarioError("mobility.speed_range: need 0 <= v1 <= v2");
    if (!(lambda >= 0.0)) throw ScenarioError("mobility.lambda: must be >= 0");
    if (!(coverage_radius > 0.0)) throw ScenarioError("coverage_radius: must be > 0");
    if (!(slot_duration > 0.0)) throw ScenarioError("slot duration must be > 0");
}

Rng user_stream(std::uint64_t seed, int group, int user) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(group), static_cast<std::uint32_t>(user)};
    return Rng(seq);
}

Rng group_size_stream(std::uint64_t seed, int group) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(group), kSizeStreamTag, 0u};
    return Rng(seq);
}

Vec2 uniform_in_disk(double radius, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    return {r * std::cos(theta), r * std::sin(theta)};
}

Vec2 reflect_in_disk(const Vec2& from, const Vec2& displacement, double radius) {
    Vec2 p = from;
    Vec2 d = displacement;
    for (int bounce = 0; bounce < 16; ++bounce) {
        const double a = d.squaredNorm();
        if (a == 0.0) break;
        if ((p + d).norm() <= radius) {
            p += d;
            d.setZero();
            break;
        }
        const double b = p.dot(d);
        const double c = p.squaredNorm() - radius * radius;
        const double t = (-b + std::sqrt(std::max(0.0, b * b - a * c))) / a;
        const Vec2 hit = p + t * d;
        const Vec2 n = hit / hit.norm();
        Vec2 rest = (1.0 - t) * d;
        rest -= 2.0 * rest.dot(n) * n;
        p = hit;
        d = rest;
    }
    const double norm = p.norm();
    if (norm > radius) p *= radius / norm;
    return p;
}

Vec2 step_user(const Vec2& position, double direction, double speed, const MobilityConfig& m) {
    const Vec2 disp = speed * m.slot_duration * Vec2(std::cos(direction), std::sin(direction));
    return reflect_in_disk(position, disp, m.coverage_radius);
}

Vec2 step_user(const Vec2& position, const MobilityConfig& m, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, 7);
    const double dir = MobilityConfig::directions()[pick(rng)];
    std::uniform_real_distribution<double> speed(m.speed_min, m.speed_max);
    const double v = m.speed_max > m.speed_min ? speed(rng) : m.speed_min;
    return step_user(position, dir, v, m);
}

int draw_group_size(double lambda, Rng& rng) {
    if (!(lambda > 0.0)) return 1;
    std::poisson_distribution<int> poisson(lambda);
    return std::max(1, poisson(rng));
}

GroupSizeChange vary_group_sizes(const std::vector<int>& current, double lambda, std::vector<Rng>& group_rngs) {
    GroupSizeChange ch;
    for (std::size_t g = 0; g < current.size(); ++g) {
        const int target = draw_group_size(lambda, group_rngs[g]);
        ch.sizes.push_back(target);
        ch.arrivals.push_back(std::max(0, target - current[g]));
        ch.departures.push_back(std::max(0, current[g] - target));
    }
    return ch;
}

UserTrace generate_trace(const ScenarioConfig& cfg, const MobilityConfig& m, std::uint64_t seed, UserLayout layout,
                         const std::vector<std::vector<Vec2>>* initial) {
    m.validate();
    const int G = cfg.num_groups();
    const double R = m.coverage_radius;
    std::vector<Rng> size_rngs;
    for (int g = 0; g < G; ++g) size_rngs.push_back(group_size_stream(seed, g));

    std::vector<int> sizes = cfg.users_per_group;
    if (m.lambda > 0.0 && !initial)
        for (int g = 0; g < G; ++g) sizes[g] = draw_group_size(m.lambda, size_rngs[g]);

    std::vector<std::vector<ActiveUser>> groups(G);
    std::vector<int> next_id(G, 0);
    int pool_index = 0;
    for (int g = 0; g < G; ++g) {
        for (int u = 0; u < sizes[g]; ++u) {
            ActiveUser a;
            if (layout == UserLayout::Pool && m.lambda == 0.0) {
                a.id = pool_index++;
                a.rng = user_stream(seed, 0, a.id);
            } else {
                a.id = u;
                a.rng = user_stream(seed, g, u);
            }
            const Vec2 drawn = uniform_in_disk(R, a.rng);
            a.pos = initial ? (*initial)[g][u] : drawn;
            groups[g].push_back(std::move(a));
        }
        next_id[g] = sizes[g];
    }

    UserTrace trace;
    auto snapshot = [&] {
        std::vector<std::vector<Vec2>> slot(G);
        for (int g = 0; g < G; ++g)
            for (const auto& a : groups[g]) slot[g].push_back(a.pos);
        trace.positions.push_back(std::move(slot));
    };
    snapshot();
    for (int s = 1; s < cfg.num_slots; ++s) {
        for (auto& grp : groups)
            for (auto& a : grp) a.pos = step_user(a.pos, m, a.rng);
        if (m.lambda > 0.0) {
            std::vector<int> current;
            for (const auto& grp : groups) current.push_back(static_cast<int>(grp.size()));
            const GroupSizeChange ch = vary_group_sizes(current, m.lambda, size_rngs);
            for (int g = 0; g < G; ++g) {
                for (int k = 0; k < ch.departures[g]; ++k) groups[g].pop_back();
                for (int k = 0; k < ch.arrivals[g]; ++k) {
                    ActiveUser a;
                    a.id = next_id[g]++;
                    a.rng = user_stream(seed, g, a.id);
                    a.pos = uniform_in_disk(R, a.rng);
                    groups[g].push_back(std::move(a));
                }
            }
        }
        snapshot();
    }
    return trace;
}

}  // namespace uavnoma
