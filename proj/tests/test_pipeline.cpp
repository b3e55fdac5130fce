#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "vbsynth/digest.hpp"
#include "vbsynth/error.hpp"
#include "vbsynth/pipeline.hpp"

using namespace vbsynth;

namespace {

const Clip& fixture()
{
    static const Clip clip = testing::make_face_clip(8, 128);
    return clip;
}

SynthesisConfig zero_bounds()
{
    SynthesisConfig cfg;
    cfg.max_rotation = 0.0;
    cfg.max_scale = 0.0;
    cfg.max_translation = 0.0;
    return cfg;
}

SynthesisManifest manifest_with(const std::vector<VbParams>& params, const std::vector<LandmarkSet>& lms)
{
    SynthesisManifest m;
    for (std::size_t i = 0; i < params.size(); ++i) {
        FrameRecord rec;
        rec.index = i;
        rec.provenance.vb = params[i];
        rec.landmarks = lms[i];
        m.frames.push_back(rec);
    }
    return m;
}

VbParams translated(const LandmarkSet& lm, Point t)
{
    VbParams p;
    for (Region r : kRegions) {
        p.region[region_slot(r)].translation = t;
        p.region[region_slot(r)].pivot = lm.centroid(r);
    }
    return p;
}

} // namespace

TEST_CASE("clip validation")
{
    Clip c = testing::make_face_clip(3, 32);
    CHECK_NOTHROW(c.validate());
    Clip empty;
    CHECK_THROWS_AS(empty.validate(), Error);
    Clip short_lm = c;
    short_lm.landmarks.pop_back();
    CHECK_THROWS_AS(short_lm.validate(), Error);
    Clip unordered = c;
    unordered.source_indices = {0, 2, 2};
    CHECK_THROWS_AS(unordered.validate(), Error);
    Clip mixed = c;
    mixed.frames[1] = make_frame(16, 16);
    CHECK_THROWS_AS(mixed.validate(), Error);
}

TEST_CASE("sample_clip with no freedom returns every index")
{
    Rng rng(0);
    const auto idx = sample_clip(32, {32, 32}, rng);
    REQUIRE(idx.size() == 32);
    for (std::size_t i = 0; i < 32; ++i) {
        CHECK(idx[i] == i);
    }
}

TEST_CASE("sample_clip windows are consecutive members of the stride-2 subsample")
{
    std::vector<std::size_t> uniform;
    for (std::size_t k = 0; k < 64; k += 2) {
        uniform.push_back(k);
    }
    std::set<std::size_t> starts;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        Rng rng(seed);
        const auto idx = sample_clip(64, {32, 8}, rng);
        REQUIRE(idx.size() == 8);
        const auto it = std::find(uniform.begin(), uniform.end(), idx[0]);
        REQUIRE(it != uniform.end());
        REQUIRE(std::distance(it, uniform.end()) >= 8);
        CHECK(std::equal(idx.begin(), idx.end(), it));
        starts.insert(idx[0]);
    }
    // Every one of the 25 windows occurs.
    CHECK(starts.size() == 25);
}

TEST_CASE("sample_clip window start over 10^3 seeds at the default policy")
{
    const ClipSamplingPolicy policy;
    CHECK(policy.uniform_count == 32);
    CHECK(policy.clip_len == 8);
    std::set<std::size_t> window_starts;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        const auto idx = sample_clip(320, policy, rng);
        REQUIRE(idx.size() == 8);
        REQUIRE(idx[0] % 10 == 0);
        const std::size_t start = idx[0] / 10;
        REQUIRE(start <= 24);
        for (std::size_t k = 0; k < 8; ++k) {
            REQUIRE(idx[k] == (start + k) * 10);
            REQUIRE(idx[k] < 320);
        }
        window_starts.insert(start);
    }
    CHECK(window_starts.size() == 25);
}

TEST_CASE("sample_clip preconditions")
{
    Rng rng(1);
    CHECK_THROWS_AS(sample_clip(31, {32, 8}, rng), Error);
    CHECK_THROWS_AS(sample_clip(100, {8, 9}, rng), Error);
    CHECK_THROWS_AS(sample_clip(100, {8, 0}, rng), Error);
    // Non-multiple totals stay in range.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng r(seed);
        for (std::size_t i : sample_clip(45, {32, 8}, r)) {
            CHECK(i < 45);
        }
    }
}

TEST_CASE("frame seeds are deterministic and collision-free")
{
    CHECK(derive_frame_seed(7, 3) == derive_frame_seed(7, 3));
    CHECK(derive_frame_seed(7, 0) != derive_frame_seed(7, 1));
    for (std::uint64_t master : {0ull, 7ull, 0xDEADBEEFull}) {
        std::vector<std::uint64_t> seeds(1000000);
        for (std::uint64_t i = 0; i < seeds.size(); ++i) {
            seeds[i] = derive_frame_seed(master, i);
        }
        std::sort(seeds.begin(), seeds.end());
        CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
    }
    std::size_t equal = 0;
    for (std::uint64_t i = 0; i < 1000000; ++i) {
        equal += derive_frame_seed(1, i) == derive_frame_seed(2, i);
    }
    CHECK(equal == 0);
    // Frozen so any change to the mixing is noticed.
    CHECK(derive_frame_seed(0, 0) == splitmix64(splitmix64(0)));
}

TEST_CASE("zero bounds reproduce the clip exactly with zero drift")
{
    const ClipResult r = synthesize_clip(fixture(), zero_bounds(), 7);
    REQUIRE(r.clip.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(r.clip.frames[i] == fixture().frames[i]);
    }
    CHECK(r.manifest.drift.is_zero());
    CHECK(r.manifest.drift.pairs.size() == 7);
}

TEST_CASE("clip synthesis golden digests, seed 7")
{
    const std::vector<std::string> golden = {
        "7b81012b854788dd359635512f8b2cc8b11cfcc628a9f41b9ba68ab0a8b1d5d9",
        "bc313c020150728b0f9ab3e83be4bad3f3f25d8e7d7ec22168958b47f8903410",
        "aec6df0279212e0f88f91a92c225a73230172225e52c175e5adcb1d6c69deb5c",
        "3ed0630151aeb2e7436619ac21a43cb5afe51c0f31445f550935038f339ba9a1",
        "feb6d582b4d9879aa94cfb96a1cfa159b5b88bc64f65f2409878e28e7768a445",
        "ab5ec5604d83e493db411bdb3aa45ee7bf636f9e115874c0e0164d4f3ae11cba",
        "4ad0276a042841d13089102984e56ba2af5ce2065b94084779d2e2cb513f56a7",
        "91e8439e790a66455207469e19cf20c843787abda3e28c3ca2b93be2946c1166",
    };
    const ClipResult a = synthesize_clip(fixture(), SynthesisConfig{}, 7);
    const ClipResult b = synthesize_clip(fixture(), SynthesisConfig{}, 7);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a.manifest.frames[i].digest == golden[i]);
        CHECK(sha256_hex(a.clip.frames[i].data()) == golden[i]);
        CHECK(a.clip.frames[i] == b.clip.frames[i]);
        CHECK(a.manifest.frames[i].source_index == i);
        CHECK(a.manifest.frames[i].landmarks == fixture().landmarks[i]);
    }
    CHECK(a.manifest.drift.mean > 0.0);
    CHECK(a.manifest.seed == 7);
}

TEST_CASE("thread count does not change outputs")
{
    for (Strategy s : {Strategy::VB, Strategy::CBI, Strategy::PFIG}) {
        SynthesisConfig cfg;
        cfg.strategy = s;
        const ClipResult serial = synthesize_clip(fixture(), cfg, 99, {1});
        for (unsigned threads : {2u, 4u, 8u, 16u}) {
            const ClipResult par = synthesize_clip(fixture(), cfg, 99, {threads});
            for (std::size_t i = 0; i < 8; ++i) {
                CHECK(par.clip.frames[i] == serial.clip.frames[i]);
                CHECK(par.manifest.frames[i].digest == serial.manifest.frames[i].digest);
            }
        }
    }
}

TEST_CASE("different master seeds give different clips")
{
    const ClipResult a = synthesize_clip(fixture(), SynthesisConfig{}, 1);
    const ClipResult b = synthesize_clip(fixture(), SynthesisConfig{}, 2);
    CHECK(a.manifest.frames[0].digest != b.manifest.frames[0].digest);
}

TEST_CASE("CBI and PFIG plans record donors and regions")
{
    SynthesisConfig cfg;
    cfg.strategy = Strategy::PFIG;
    const ClipResult r = synthesize_clip(fixture(), cfg, 5);
    for (std::size_t i = 0; i < 8; ++i) {
        const FrameProvenance& p = r.manifest.frames[i].provenance;
        CHECK(p.strategy == Strategy::PFIG);
        REQUIRE(p.donor.has_value());
        CHECK(*p.donor != i);
        CHECK(*p.donor < 8);
        REQUIRE(p.region.has_value());
        CHECK_FALSE(p.vb.has_value());
        // Re-rendering from the recorded plan reproduces the frame.
        const Frame again = blend_donor_region(fixture().frames[i], fixture().frames[*p.donor],
                                               fixture().landmarks[i], cfg, *p.region);
        CHECK(again == r.clip.frames[i]);
    }
    cfg.strategy = Strategy::CBI;
    const ClipResult c = synthesize_clip(fixture(), cfg, 5);
    std::set<std::size_t> donors;
    for (std::size_t i = 0; i < 8; ++i) {
        const FrameProvenance& p = c.manifest.frames[i].provenance;
        REQUIRE(p.donor.has_value());
        CHECK(*p.donor != i);
        donors.insert(*p.donor);
        CHECK(c.clip.frames[i] ==
              synthesize_frame_cbi(fixture().frames[i], fixture().frames[*p.donor], fixture().landmarks[i], cfg));
    }
    CHECK(donors.size() > 1);
    CHECK(c.manifest.drift.is_zero());
}

TEST_CASE("donor strategies need two frames")
{
    const Clip one = testing::make_face_clip(1, 64);
    for (Strategy s : {Strategy::CBI, Strategy::PFIG}) {
        SynthesisConfig cfg;
        cfg.strategy = s;
        try {
            synthesize_clip(one, cfg, 1);
            FAIL("expected NoDonor");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoDonor);
        }
    }
    CHECK_NOTHROW(synthesize_clip(one, SynthesisConfig{}, 1));
}

TEST_CASE("per-frame failures abort with the lowest failing frame")
{
    Clip bad = fixture();
    bad.landmarks[5] = testing::template_landmarks(500, 500, 50);
    bad.landmarks[3] = testing::template_landmarks(-500, 500, 50);
    for (unsigned threads : {1u, 8u}) {
        try {
            synthesize_clip(bad, SynthesisConfig{}, 1, {threads});
            FAIL("expected SynthesisError");
        } catch (const SynthesisError& e) {
            CHECK(e.frame() == 3);
            CHECK(e.code() == ErrorCode::BadLandmarks);
            CHECK(std::string(e.what()).find("frame 3") != std::string::npos);
        }
    }
}

TEST_CASE("drift examples")
{
    const LandmarkSet lm = testing::template_landmarks(10, 10, 100);
    const std::vector<LandmarkSet> lms{lm, lm, lm};

    const DriftReport zero = drift_statistic(manifest_with({translated(lm, {}), translated(lm, {}), translated(lm, {})}, lms));
    CHECK(zero.is_zero());
    CHECK(zero.pairs.size() == 2);

    const DriftReport flip =
        drift_statistic(manifest_with({translated(lm, {1, 0}), translated(lm, {-1, 0}), translated(lm, {1, 0})}, lms));
    REQUIRE(flip.pairs.size() == 2);
    for (const PairDrift& p : flip.pairs) {
        CHECK(p.mean == 2.0);
        for (double m : p.region_mean) {
            CHECK(m == 2.0);
        }
    }
    CHECK(flip.mean == 2.0);
    CHECK(flip.max == 2.0);

    CHECK_THROWS_AS(drift_statistic(manifest_with({translated(lm, {})}, lms), lms), Error);
    SynthesisManifest missing = manifest_with({translated(lm, {}), translated(lm, {})}, {lm, lm});
    missing.frames[1].provenance.vb.reset();
    CHECK_THROWS_AS(drift_statistic(missing), Error);
}

TEST_CASE("drift is zero exactly when every recorded transform is the identity")
{
    const LandmarkSet& lm = fixture().landmarks[0];
    const std::vector<LandmarkSet> lms(6, lm);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const PerturbationBounds b{trial % 2 ? 0.05 : 0.0, trial % 3 ? 0.03 : 0.0, trial % 5 ? 2.0 : 0.0};
        std::vector<VbParams> params;
        for (int i = 0; i < 6; ++i) {
            params.push_back(sample_vb_params(lm, b, WarpMode::PerRegion, rng));
        }
        const bool identity = std::all_of(params.begin(), params.end(), [](const VbParams& p) { return p.is_identity(); });
        CHECK(drift_statistic(manifest_with(params, lms)).is_zero() == identity);
        CHECK(identity == b.is_zero());
    }
}

TEST_CASE("mean drift grows with the translation bound")
{
    const LandmarkSet& lm = fixture().landmarks[0];
    const std::vector<LandmarkSet> lms(8, lm);
    double previous = -1.0;
    for (double ut : {0.0, 1.0, 2.0, 4.0}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            std::vector<VbParams> params;
            for (std::size_t i = 0; i < 8; ++i) {
                Rng rng(derive_frame_seed(seed, i));
                params.push_back(sample_vb_params(lm, {0.0, 0.0, ut}, WarpMode::PerRegion, rng));
            }
            total += drift_statistic(manifest_with(params, lms)).mean;
        }
        CHECK(total >= previous);
        if (ut == 0.0) {
            CHECK(total == 0.0);
        }
        previous = total;
    }
}

TEST_CASE("smoothing averages parameters over a centered window")
{
    const LandmarkSet& lm = fixture().landmarks[0];
    std::vector<VbParams> raw{translated(lm, {3, 0}), translated(lm, {0, 3}), translated(lm, {-3, 0}),
                              translated(lm, {0, -6})};
    raw[1].region[0].rotation = 0.03;
    raw[2].region[0].scale = 1.03;

    const auto same = smooth_params(raw, 1);
    CHECK(same.size() == raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(same[i].region == raw[i].region);
    }

    const auto s = smooth_params(raw, 3);
    CHECK(s[0].region[0].translation.x == doctest::Approx(1.5));
    CHECK(s[0].region[0].translation.y == doctest::Approx(1.5));
    CHECK(s[1].region[0].translation.x == doctest::Approx(0.0));
    CHECK(s[1].region[0].translation.y == doctest::Approx(1.0));
    CHECK(s[1].region[0].rotation == doctest::Approx(0.01));
    CHECK(s[3].region[0].translation.y == doctest::Approx(-3.0));
    CHECK(s[2].region[0].scale == doctest::Approx((1.0 + 1.03 + 1.0) / 3.0));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t r = 0; r < kRegionCount; ++r) {
            CHECK(s[i].region[r].pivot == raw[i].region[r].pivot);
        }
    }
}

TEST_CASE("a smoothed clip drifts less than the raw one")
{
    SynthesisConfig raw;
    SynthesisConfig smooth;
    smooth.smoothing_window = 5;
    const ClipResult a = synthesize_clip(fixture(), raw, 11);
    const ClipResult b = synthesize_clip(fixture(), smooth, 11);
    CHECK(b.manifest.drift.mean < a.manifest.drift.mean);
    CHECK(b.manifest.drift.mean > 0.0);
}
