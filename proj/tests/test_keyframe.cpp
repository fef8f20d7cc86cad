#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "splat/core/rng.hpp"
#include "splat/kf/correlation.hpp"
#include "splat/kf/features.hpp"
#include "splat/kf/motion.hpp"
#include "splat/kf/window.hpp"

using namespace splat;

namespace {

ImageD noise_image(Rng& rng, int h, int w) {
    ImageD img(h, w, 3);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
    return img;
}

// shift content right by `px` columns, filling the vacated strip with noise
ImageD shift_right(const ImageD& src, int px, Rng& rng) {
    ImageD dst(src.height(), src.width(), 3);
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
            for (int c = 0; c < 3; ++c)
                dst.at(y, x, c) = x >= px ? src.at(y, x - px, c) : rng.uniform();
    return dst;
}

double dot_oracle(const float* a, const float* b) {
    double s = 0.0;
    for (int k = 0; k < FeatureMap::kDim; ++k) s += double(a[k]) * b[k];
    return s;
}

FramePtr make_frame(int index, std::vector<std::uint32_t> ids, double tx = 0.0) {
    auto f = std::make_shared<Frame>();
    f->index = index;
    std::sort(ids.begin(), ids.end());
    f->visible_ids = std::move(ids);
    f->pose.translation = {tx, 0, 0};
    return f;
}

FramePtr frame_with_features(int index, const ImageD& rgb, const Pose& pose = {}) {
    auto f = std::make_shared<Frame>();
    f->index = index;
    f->rgb = rgb;
    f->pose = pose;
    f->features = std::make_shared<FeatureMap>(extract_features(rgb));
    return f;
}

// independent set-algebra oracle for the co-visibility scores
double rc_oracle(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::set<std::uint32_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::set<std::uint32_t> uni = sa, inter;
    uni.insert(sb.begin(), sb.end());
    for (auto v : sa)
        if (sb.count(v)) inter.insert(v);
    if (uni.empty()) return 0.0;
    return double(sa.size() - inter.size()) / double(uni.size());
}

double oc_oracle(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::set<std::uint32_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::size_t inter = 0;
    for (auto v : sa) inter += sb.count(v);
    return double(inter) / double(std::min(sa.size(), sb.size()));
}

} // namespace

TEST_CASE("descriptor grid covers full 8x8 blocks and is L2 normalized") {
    Rng rng(31);
    const ImageD img = noise_image(rng, 40, 48);
    const FeatureMap fm = extract_features(img);
    CHECK(fm.rows == 5);
    CHECK(fm.cols == 6);
    for (int r = 0; r < fm.rows; ++r) {
        for (int c = 0; c < fm.cols; ++c) {
            CHECK(dot_oracle(fm.at(r, c), fm.at(r, c)) == doctest::Approx(1.0).epsilon(1e-5));
        }
    }

    // remainder rows and columns are ignored
    const FeatureMap odd = extract_features(noise_image(rng, 17, 23));
    CHECK(odd.rows == 2);
    CHECK(odd.cols == 2);

    CHECK_THROWS_AS(extract_features(ImageD(4, 40, 3)), std::invalid_argument);
    CHECK_THROWS_AS(extract_features(ImageD(40, 40, 1)), std::invalid_argument);
}

TEST_CASE("descriptors shift with the image content") {
    Rng rng(32);
    const ImageD img = noise_image(rng, 32, 64);
    const ImageD shifted = shift_right(img, 8, rng);
    const FeatureMap f1 = extract_features(img);
    const FeatureMap f2 = extract_features(shifted);

    // cells whose pixels and +-1 context are pure shifted content match exactly;
    // c=1 is excluded because its left context is the refilled strip, and the
    // image border columns use one-sided gradients
    for (int r = 0; r < f1.rows; ++r) {
        for (int c = 2; c < f1.cols - 1; ++c) {
            const float* a = f2.at(r, c);
            const float* b = f1.at(r, c - 1);
            for (int k = 0; k < FeatureMap::kDim; ++k) CHECK(a[k] == b[k]);
        }
    }
}

TEST_CASE("correlation volume matches the brute-force dot product") {
    Rng rng(33);
    const FeatureMap fi = extract_features(noise_image(rng, 24, 32));
    const FeatureMap fj = extract_features(noise_image(rng, 24, 32));
    const CorrVolume vol = correlation(fi, fj);
    REQUIRE(vol.h1 == 3);
    REQUIRE(vol.w1 == 4);
    for (int u1 = 0; u1 < vol.h1; ++u1)
        for (int v1 = 0; v1 < vol.w1; ++v1)
            for (int u2 = 0; u2 < vol.h2; ++u2)
                for (int v2 = 0; v2 < vol.w2; ++v2) {
                    const double expect = dot_oracle(fi.at(u1, v1), fj.at(u2, v2));
                    CHECK(vol.at(u1, v1, u2, v2) == doctest::Approx(expect).epsilon(1e-5));
                    CHECK(std::abs(vol.at(u1, v1, u2, v2)) <= 1.0 + 1e-6);
                }

    // swapping the inputs transposes the volume
    const CorrVolume rev = correlation(fj, fi);
    CHECK(vol.at(1, 2, 2, 3) == doctest::Approx(rev.at(2, 3, 1, 2)).epsilon(1e-6));
}

TEST_CASE("self correlation peaks on the diagonal") {
    Rng rng(34);
    const FeatureMap fm = extract_features(noise_image(rng, 24, 24));
    const CorrVolume vol = correlation(fm, fm);
    for (int r = 0; r < vol.h1; ++r)
        for (int c = 0; c < vol.w1; ++c) CHECK(vol.at(r, c, r, c) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("pyramid levels average the child cells that exist") {
    Rng rng(35);
    CorrVolume l0;
    l0.h1 = 2;
    l0.w1 = 3;
    l0.h2 = 5;
    l0.w2 = 7; // odd target dims exercise the edge bins
    l0.v.resize(std::size_t(2) * 3 * 5 * 7);
    for (auto& v : l0.v) v = static_cast<float>(rng.uniform(-1, 1));

    const CorrelationPyramid pyr = build_pyramid(l0);
    for (int k = 1; k < 4; ++k) {
        const CorrVolume& src = pyr.levels[k - 1];
        const CorrVolume& dst = pyr.levels[k];
        CHECK(dst.h2 == (src.h2 + 1) / 2);
        CHECK(dst.w2 == (src.w2 + 1) / 2);
        for (int u1 = 0; u1 < dst.h1; ++u1)
            for (int v1 = 0; v1 < dst.w1; ++v1)
                for (int p = 0; p < dst.h2; ++p)
                    for (int q = 0; q < dst.w2; ++q) {
                        double acc = 0.0;
                        int count = 0;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const int u = 2 * p + dy, v = 2 * q + dx;
                                if (u >= src.h2 || v >= src.w2) continue;
                                acc += src.at(u1, v1, u, v);
                                ++count;
                            }
                        CHECK(dst.at(u1, v1, p, q) ==
                              doctest::Approx(acc / count).epsilon(1e-6));
                        CHECK(std::abs(dst.at(u1, v1, p, q)) <= 1.0 + 1e-6);
                    }
    }
}

TEST_CASE("lookup at integer lattice points returns the raw level-0 values") {
    CorrVolume l0;
    l0.h1 = 1;
    l0.w1 = 1;
    l0.h2 = 8;
    l0.w2 = 8;
    l0.v.resize(64);
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) l0.at(0, 0, u, v) = static_cast<float>(u * 8 + v) / 100.f;
    const CorrelationPyramid pyr = build_pyramid(l0);

    Grid<double> coords(1, 1, 2);
    coords.at(0, 0, 0) = 4.0; // x
    coords.at(0, 0, 1) = 3.0; // y
    const Grid<float> looked = pyramid_lookup(pyr, coords, 1);
    REQUIRE(looked.channels() == 4 * 9);

    // level 0 block: rows y-1..y+1, cols x-1..x+1, row-major
    int slot = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            CHECK(looked.at(0, 0, slot++) ==
                  doctest::Approx(pyr.levels[0].at(0, 0, 3 + dy, 4 + dx)).epsilon(1e-6));
}

TEST_CASE("lookup midpoints interpolate and the border reads zero") {
    CorrVolume l0;
    l0.h1 = 1;
    l0.w1 = 1;
    l0.h2 = 4;
    l0.w2 = 4;
    l0.v.resize(16);
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v) l0.at(0, 0, u, v) = static_cast<float>(10 * u + v) / 100.f;
    const CorrelationPyramid pyr = build_pyramid(l0);

    Grid<double> coords(1, 1, 2);
    coords.at(0, 0, 0) = 1.5;
    coords.at(0, 0, 1) = 2.0;
    const Grid<float> looked = pyramid_lookup(pyr, coords, 0);
    REQUIRE(looked.channels() == 4);

    // level 0: halfway between columns 1 and 2 on row 2
    CHECK(looked.at(0, 0, 0) == doctest::Approx(0.5 * (0.21 + 0.22)).epsilon(1e-5));
    // level 1 is a 2x2 volume; (y, x) = (1.0, 0.75) mixes the bottom bins
    const float b0 = pyr.levels[1].at(0, 0, 1, 0), b1 = pyr.levels[1].at(0, 0, 1, 1);
    CHECK(looked.at(0, 0, 1) == doctest::Approx(0.25 * b0 + 0.75 * b1).epsilon(1e-5));

    // far outside every level: all zeros
    coords.at(0, 0, 0) = 100.0;
    coords.at(0, 0, 1) = -50.0;
    const Grid<float> outside = pyramid_lookup(pyr, coords, 0);
    for (int k = 0; k < 4; ++k) CHECK(outside.at(0, 0, k) == 0.0f);
}

TEST_CASE("identical frames measure zero flow everywhere") {
    Rng rng(36);
    const ImageD img = noise_image(rng, 64, 64);
    const FeatureMap fm = extract_features(img);
    const FlowField flow = motion_vector(fm, fm);
    CHECK(flow.reliable_fraction == doctest::Approx(1.0));
    CHECK(flow.mean_norm < 0.05);
    CHECK_FALSE(flow.low_texture);
}

TEST_CASE("an 8 pixel shift reads as one cell of flow") {
    Rng rng(37);
    const ImageD img = noise_image(rng, 64, 64);
    const ImageD shifted = shift_right(img, 8, rng);
    const FlowField flow = motion_vector(extract_features(img), extract_features(shifted));

    // the refilled strip has no true match and pads the mean with junk flows,
    // so the mean is only loosely bounded; interior cells are exact
    CHECK(flow.mean_norm > 0.8);
    CHECK(flow.mean_norm < 2.5);
    CHECK_FALSE(flow.low_texture);
    int checked = 0;
    for (int r = 1; r < 7; ++r) {
        for (int c = 1; c < 6; ++c) {
            if (!flow.reliable.at(r, c)) continue;
            ++checked;
            CHECK(flow.flow.at(r, c, 0) == doctest::Approx(1.0).epsilon(0.3));
            CHECK(std::abs(flow.flow.at(r, c, 1)) < 0.3);
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("featureless content is flagged low texture") {
    Rng rng(38);
    const ImageD a = noise_image(rng, 64, 64);
    const ImageD flat(64, 64, 3, 0.5); // constant: descriptors collapse, matches fail
    const FlowField flow = motion_vector(extract_features(a), extract_features(flat));
    CHECK(flow.low_texture);
    CHECK(flow.reliable_fraction < 0.25);
}

TEST_CASE("size mismatch between feature grids is rejected") {
    Rng rng(39);
    const FeatureMap a = extract_features(noise_image(rng, 32, 32));
    const FeatureMap b = extract_features(noise_image(rng, 32, 40));
    CHECK_THROWS_AS(motion_vector(a, b), std::invalid_argument);
    CHECK_THROWS_AS(correlation(a, b), std::invalid_argument);
}

TEST_CASE("motion filter rule coverage") {
    Rng rng(40);
    const WindowConfig cfg;
    const ImageD base = noise_image(rng, 64, 64);

    SUBCASE("first frame is always a keyframe at identity") {
        MotionFilterState state;
        Frame f;
        f.index = 0;
        const MotionDecision d = motion_filter(state, f, cfg);
        CHECK(d.keyframe);
        CHECK(d.reason == doctest::String("first_frame"));
        CHECK(d.predicted_pose.translation.norm() == 0.0);
    }

    SUBCASE("static frames are skipped") {
        MotionFilterState state;
        state.last_kf = frame_with_features(0, base);
        const FramePtr same = frame_with_features(1, base);
        const MotionDecision d = motion_filter(state, *same, cfg);
        CHECK_FALSE(d.keyframe);
        CHECK(d.reason == doctest::String("static"));
        CHECK(d.mean_flow_px < cfg.motion_threshold);
    }

    SUBCASE("large flow promotes the frame") {
        MotionFilterState state;
        state.last_kf = frame_with_features(0, base);
        const FramePtr moved = frame_with_features(1, shift_right(base, 8, rng));
        const MotionDecision d = motion_filter(state, *moved, cfg);
        CHECK(d.keyframe);
        CHECK(d.reason == doctest::String("motion"));
        CHECK(d.mean_flow_px > cfg.motion_threshold);
        CHECK(d.mean_flow_px < 20.0);
    }

    SUBCASE("long static runs time out into a keyframe") {
        MotionFilterState state;
        state.last_kf = frame_with_features(0, base);
        const FramePtr same = frame_with_features(15, base);
        const MotionDecision d = motion_filter(state, *same, cfg);
        CHECK(d.keyframe);
        CHECK(d.reason == doctest::String("interval"));
    }

    SUBCASE("matching failure promotes defensively") {
        MotionFilterState state;
        state.last_kf = frame_with_features(0, base);
        const FramePtr junk = frame_with_features(1, ImageD(64, 64, 3, 0.5));
        const MotionDecision d = motion_filter(state, *junk, cfg);
        CHECK(d.keyframe);
        CHECK(d.reason == doctest::String("low_texture"));
        CHECK(d.low_texture);
    }

    SUBCASE("constant velocity extrapolates the last two keyframe poses") {
        MotionFilterState state;
        Pose last;
        last.translation = {0.1, 0, 0};
        state.prev_kf = frame_with_features(0, base, Pose{});
        state.last_kf = frame_with_features(1, base, last);
        const FramePtr moved = frame_with_features(2, shift_right(base, 8, rng));
        const MotionDecision d = motion_filter(state, *moved, cfg);
        REQUIRE(d.keyframe);
        CHECK((d.predicted_pose.translation - Eigen::Vector3d(0.2, 0, 0)).norm() < 1e-12);
    }

    SUBCASE("missing features are an error") {
        MotionFilterState state;
        state.last_kf = frame_with_features(0, base);
        Frame bare;
        bare.index = 1;
        CHECK_THROWS_AS(motion_filter(state, bare, cfg), std::invalid_argument);
    }
}

TEST_CASE("co-visibility scores match hand enumerations") {
    const std::vector<std::uint32_t> a = {1, 2, 3};
    const std::vector<std::uint32_t> b = {3, 4};
    const std::vector<std::uint32_t> none = {};

    CHECK(relative_complement(a, b) == doctest::Approx(2.0 / 4.0));
    CHECK(relative_complement(b, a) == doctest::Approx(1.0 / 4.0));
    CHECK(relative_complement(none, none) == 0.0);
    CHECK(relative_complement(a, none) == doctest::Approx(1.0));
    CHECK(relative_complement(none, a) == 0.0);

    CHECK(overlap_coefficient(a, b) == doctest::Approx(0.5));
    CHECK(overlap_coefficient(a, std::vector<std::uint32_t>{2, 3}) == doctest::Approx(1.0));
    CHECK(overlap_coefficient(none, a) == 0.0);
    CHECK(overlap_coefficient(a, none) == 0.0);
}

TEST_CASE("co-visibility scores agree with a set-algebra oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint32_t> a, b;
        for (std::uint32_t v = 0; v < 30; ++v) {
            if (rng.uniform() < 0.4) a.push_back(v);
            if (rng.uniform() < 0.4) b.push_back(v);
        }
        CHECK(relative_complement(a, b) == doctest::Approx(rc_oracle(a, b)).epsilon(1e-12));
        CHECK(overlap_coefficient(a, b) == doctest::Approx(oc_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("window admission rules") {
    WindowConfig cfg;
    cfg.window_capacity = 3;
    cfg.info_threshold = 0.15;
    cfg.min_mapping_distance = 20;

    KeyframeWindow win;

    // bootstrap: the first two keyframes enter unconditionally
    auto u0 = win.update(make_frame(0, {0, 1, 2, 3}), cfg);
    CHECK(u0.admitted);
    CHECK(u0.reason == doctest::String("bootstrap"));
    auto u1 = win.update(make_frame(1, {0, 1, 2, 3}), cfg);
    CHECK(u1.admitted);
    CHECK(u1.reason == doctest::String("bootstrap"));
    CHECK(u1.rc == 0.0);

    // identical view within the mapping distance: redundant
    auto u2 = win.update(make_frame(2, {0, 1, 2, 3}), cfg);
    CHECK_FALSE(u2.admitted);
    CHECK(u2.reason == doctest::String("redundant"));
    CHECK(win.members().size() == 2);

    // half-new content: RC = 2/6 > 0.15
    auto u3 = win.update(make_frame(3, {0, 1, 4, 5}), cfg);
    CHECK(u3.admitted);
    CHECK(u3.reason == doctest::String("information"));
    CHECK(u3.rc == doctest::Approx(2.0 / 6.0));

    // same view again but 20 frames later: admitted on distance alone
    auto u4 = win.update(make_frame(23, {0, 1, 4, 5}), cfg);
    CHECK(u4.admitted);
    CHECK(u4.reason == doctest::String("distance"));
    CHECK(u4.rc == 0.0);
    CHECK(win.total_admitted() == 4);
}

TEST_CASE("rejection compares against the last admitted even after eviction") {
    WindowConfig cfg;
    cfg.window_capacity = 2;

    KeyframeWindow win;
    win.update(make_frame(0, {0, 1, 2, 3}), cfg);
    win.update(make_frame(1, {0, 1, 2, 3}), cfg);
    // this admission evicts one member, but stays the comparison target
    auto u = win.update(make_frame(2, {10, 11, 12, 13}), cfg);
    CHECK(u.admitted);
    CHECK(u.evicted_frame.has_value());

    // matches the latest admission exactly: redundant despite disjoint window head
    auto v = win.update(make_frame(3, {10, 11, 12, 13}), cfg);
    CHECK_FALSE(v.admitted);
    CHECK(v.reason == doctest::String("redundant"));
}

TEST_CASE("eviction prefers the stale low-overlap member") {
    WindowConfig cfg;
    cfg.window_capacity = 3;
    cfg.oc_removal_threshold = 0.3;

    KeyframeWindow win;
    win.update(make_frame(0, {0, 1, 2, 3}), cfg);
    win.update(make_frame(1, {100, 101, 102, 103}), cfg); // will not overlap the new view
    win.update(make_frame(2, {0, 1, 2, 4}), cfg);

    // new view overlaps frames 0 and 2 but not frame 1
    auto u = win.update(make_frame(3, {0, 1, 2, 5}), cfg);
    CHECK(u.admitted);
    REQUIRE(u.evicted_frame.has_value());
    CHECK(*u.evicted_frame == 1);
    CHECK(win.members().size() == 3);
}

TEST_CASE("with full overlap the closest-spaced member is evicted") {
    WindowConfig cfg;
    cfg.window_capacity = 3;

    KeyframeWindow win;
    // shared ids keep every overlap at 1; translations decide the victim
    win.update(make_frame(0, {0, 1, 2}, 0.0), cfg);
    win.update(make_frame(1, {0, 1, 2}, 1.0), cfg);  // 1.0 from predecessor
    win.update(make_frame(21, {0, 1, 2}, 1.05), cfg); // 0.05 from predecessor: victim

    auto u = win.update(make_frame(42, {0, 1, 2}, 3.0), cfg);
    CHECK(u.admitted);
    REQUIRE(u.evicted_frame.has_value());
    CHECK(*u.evicted_frame == 21);
    // the window head is exempt from the spacing rule
    CHECK(win.members().front()->index == 0);
}
