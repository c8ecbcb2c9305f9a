#include "ssanet/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "ssanet/common/error.hpp"
#include "ssanet/common/rng.hpp"

namespace ssanet::data {

namespace {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double segment_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

Point bezier(Point p0, Point p1, Point p2, double t) {
    const double u = 1.0 - t;
    return {u * u * p0.x + 2.0 * u * t * p1.x + t * t * p2.x, u * u * p0.y + 2.0 * u * t * p1.y + t * t * p2.y};
}

}  // namespace

void SynthConfig::validate() const {
    if (image_size < 8 || image_size % 4 != 0)
        throw InvalidArgument("synthetic image_size must be a multiple of 4 and at least 8, got " +
                              std::to_string(image_size));
    if (vessels_min > vessels_max) throw InvalidArgument("synthetic vessel count range is empty");
    if (!(radius_min > 0.0) || radius_min > radius_max) throw InvalidArgument("synthetic radius range must be positive and nonempty");
    if (radius_max > static_cast<double>(image_size) / 8.0)
        throw InvalidArgument("synthetic radius " + std::to_string(radius_max) + " exceeds image_size/8");
    if (!(contrast_min > 0.0) || contrast_min > contrast_max || contrast_max > 1.0)
        throw InvalidArgument("synthetic contrast range must lie in (0, 1] and be nonempty");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidArgument("synthetic noise_sigma must be >= 0");
}

SampleRecord generate_synthetic(const SynthConfig& cfg, std::string id) {
    cfg.validate();
    const std::size_t n = cfg.image_size;
    const engine::Shape shape{1, 1, n, n};
    const double centre = (static_cast<double>(n) - 1.0) / 2.0;
    const double fov_radius = static_cast<double>(n) / 2.0 - 1.0;
    Rng rng(cfg.seed);

    SampleRecord r;
    r.id = std::move(id);
    r.image = engine::Tensor(shape);
    r.vessel_mask = engine::Tensor(shape);
    r.fov_mask = engine::Tensor(shape);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
            if (std::hypot(x - centre, y - centre) <= fov_radius) r.fov_mask(0, 0, y, x) = 1.0;

    // Transmission factor per pixel; overlapping vessels multiply.
    std::vector<double> transmission(n * n, 1.0);
    const std::size_t count = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(cfg.vessels_min), static_cast<std::int64_t>(cfg.vessels_max)));
    for (std::size_t v = 0; v < count; ++v) {
        const double start_r = fov_radius * std::sqrt(rng.uniform());
        const double start_a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double length = fov_radius * rng.uniform(0.3, 0.8);
        const double bend = rng.uniform(-0.3, 0.3) * length;
        // Thin vessels dominate, as in fundus images.
        const double radius = cfg.radius_min + (cfg.radius_max - cfg.radius_min) * std::pow(rng.uniform(), 2.0);
        const double contrast = rng.uniform(cfg.contrast_min, cfg.contrast_max);

        const Point p0{centre + start_r * std::cos(start_a), centre + start_r * std::sin(start_a)};
        const Point p2{p0.x + length * std::cos(heading), p0.y + length * std::sin(heading)};
        const Point p1{(p0.x + p2.x) / 2.0 - bend * std::sin(heading), (p0.y + p2.y) / 2.0 + bend * std::cos(heading)};

        const std::size_t segments = static_cast<std::size_t>(std::ceil(length)) * 2 + 2;
        std::vector<Point> poly(segments + 1);
        for (std::size_t i = 0; i <= segments; ++i) poly[i] = bezier(p0, p1, p2, static_cast<double>(i) / segments);

        double lo_x = poly[0].x, hi_x = poly[0].x, lo_y = poly[0].y, hi_y = poly[0].y;
        for (const Point& p : poly) {
            lo_x = std::min(lo_x, p.x), hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y), hi_y = std::max(hi_y, p.y);
        }
        const auto clip = [n](double c) { return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n - 1))); };
        for (std::size_t y = clip(std::floor(lo_y - radius)); y <= clip(std::ceil(hi_y + radius)); ++y)
            for (std::size_t x = clip(std::floor(lo_x - radius)); x <= clip(std::ceil(hi_x + radius)); ++x) {
                const Point p{static_cast<double>(x), static_cast<double>(y)};
                double d = segment_distance(p, poly[0], poly[1]);
                for (std::size_t i = 1; i < segments && d > radius; ++i) d = std::min(d, segment_distance(p, poly[i], poly[i + 1]));
                if (d > radius) continue;
                if (r.vessel_mask(0, 0, y, x) == 0.0 && r.fov_mask(0, 0, y, x) == 1.0) r.vessel_mask(0, 0, y, x) = 1.0;
                transmission[y * n + x] *= 1.0 - contrast;
            }
    }

    const double base = rng.uniform(0.55, 0.75);
    const double gx = rng.uniform(-0.15, 0.15);
    const double gy = rng.uniform(-0.15, 0.15);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            if (r.fov_mask(0, 0, y, x) == 0.0) continue;
            const double background = base + gx * (x - centre) / fov_radius + gy * (y - centre) / fov_radius;
            const double value = background * transmission[y * n + x] + cfg.noise_sigma * rng.normal();
            r.image(0, 0, y, x) = std::clamp(value, 0.0, 1.0);
        }
    return r;
}

std::vector<SampleRecord> generate_dataset(const SynthConfig& cfg, std::size_t count) {
    std::vector<SampleRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        SynthConfig c = cfg;
        c.seed = derive_seed(cfg.seed, i);
        char id[32];
        std::snprintf(id, sizeof id, "synth_%03zu", i);
        out.push_back(generate_synthetic(c, id));
    }
    return out;
}

}  // namespace ssanet::data
