#include <gtest/gtest.h>

#include "hardylab/cli.hpp"

using namespace hlab;
using namespace hlab::cli;

namespace {

RunConfig from_text(const std::string& text) { return parse_run_config(parse_config_text(text)); }

std::string invalid_message(const std::string& text) {
    try {
        (void)from_text(text);
    } catch (const InvalidInput& e) {
        return e.what();
    }
    return {};
}

const std::string verify_sample = R"(# sample
command = verify
setting = cylindrical
space.n = 2
space.k = 2
p = 2
alpha = 0
function = annular-bump   # r in (1, 2)
function.r0 = 1
function.r1 = 2
quadrature.target_rel_err = 1e-7
)";

const std::string adjudicate_base = R"(command = adjudicate-log-factor
setting = homogeneous
identity = log-hardy
p = 2
alpha = 0
beta = -1
function = random
function.scale = 0.5
quadrature.target_rel_err = 1e-7
)";

const std::string three_triples = R"(triple.0.group = euclidean
triple.0.group.n = 2
triple.1.group = euclidean
triple.1.group.n = 2
triple.1.p = 3
triple.1.function.seed = 9
triple.2.group = heisenberg
triple.2.beta = 0
)";

}  // namespace

TEST(ConfigText, CommentsBlankLinesAndWhitespace) {
    const auto kv = parse_config_text("# head\n\n  a = 1  \nb=two # tail\n\t\n");
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two");
}

TEST(ConfigText, Errors) {
    EXPECT_THROW((void)parse_config_text("a = 1\na = 2\n"), InvalidInput);
    EXPECT_THROW((void)parse_config_text("just words\n"), InvalidInput);
    EXPECT_THROW((void)parse_config_text(" = 3\n"), InvalidInput);
    EXPECT_NE(invalid_message("bogus = 1\n").find("bogus"), std::string::npos);
    EXPECT_NE(invalid_message("p = two\n").find("'p'"), std::string::npos);
    EXPECT_NE(invalid_message("command = plot\n").find("command"), std::string::npos);
    EXPECT_NE(invalid_message("case.0.p = 2\ncase.2.p = 3\n").find("gaps"), std::string::npos);
    EXPECT_NE(invalid_message("case.0.nope = 2\n").find("case.0.nope"), std::string::npos);
}

TEST(ConfigText, DeltaOutsideUnitIntervalNamesDelta) {
    for (const char* v : {"1.5", "-0.1"}) {
        const std::string msg = invalid_message(std::string("command = verify\nidentity = ckn\ndelta = ") + v + "\n");
        EXPECT_NE(msg.find("delta"), std::string::npos) << msg;
        EXPECT_NE(msg.find("δ"), std::string::npos) << msg;
    }
    RunConfig cfg;
    cfg.base.params.delta = 2.0;
    cfg.base.identity = "ckn";
    const auto res = run(cfg);
    EXPECT_EQ(res.exit_code, exit_invalid);
    EXPECT_NE(res.body["error"].get<std::string>().find("delta"), std::string::npos);
}

TEST(ConfigText, RoundTripsLosslessly) {
    std::vector<RunConfig> cfgs;
    cfgs.push_back(from_text(verify_sample));
    cfgs.push_back(from_text(adjudicate_base + three_triples));
    cfgs.push_back(from_text("command = sweep\nspace.n = 3\nspace.k = 3\np = 2\nalpha = 0.1\nsweep.eps = 0.3, 1e-3\n"
                             "sweep.taper = fixed-ratio\nquadrature.scheme = tanh-sinh\n"));
    cfgs.push_back(from_text("command = cp-probe\ncp.ps = 2.25, 3\nseed = 12\n"));
    cfgs.push_back(from_text("command = verify\nsetting = homogeneous\ngroup = anisotropic\ngroup.weights = 1/2,1\n"
                             "function = box-bump\nfunction.box = 0.3:0.7,-0.2:0.2\nR = 0.1\n"));
    for (const auto& c : cfgs) {
        const KeyValues kv = to_key_values(c);
        const RunConfig back = parse_run_config(parse_config_text(to_config_text(kv)));
        EXPECT_EQ(to_key_values(back), kv);
        EXPECT_EQ(config_hash(back), config_hash(c));
    }
}

TEST(ConfigHash, FnvVectors) {
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
    EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(ConfigHash, TracksEffectiveConfig) {
    const RunConfig a = from_text(verify_sample);
    RunConfig b = a;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.base.params.alpha = 0.5;
    EXPECT_NE(config_hash(a), config_hash(b));
    RunConfig c = a;
    override_nodes(c, 64);
    EXPECT_NE(config_hash(a), config_hash(c));
    RunConfig d = a;
    d.output_path = "/tmp/elsewhere.json";
    EXPECT_EQ(config_hash(a), config_hash(d));
}

TEST(Verify, AnnularBumpSample) {
    const auto res = run(from_text(verify_sample));
    EXPECT_EQ(res.exit_code, exit_pass);
    ASSERT_EQ(res.body["records"].size(), 1u);
    const auto& r = res.body["records"][0];
    EXPECT_LE(r["rel_residual"].get<double>(), 1e-6);
    EXPECT_TRUE(r["passed"].get<bool>());
    EXPECT_EQ(res.body["status"], "pass");
    EXPECT_EQ(res.body["version"], tool_version);
    EXPECT_EQ(res.body["config_hash"].get<std::string>().size(), 16u);
    EXPECT_GE(res.wall_time_s, 0.0);
}

TEST(Verify, CaseBatchIsOrderedByIndex) {
    const auto res = run(from_text(verify_sample + "case.0.alpha = 1\ncase.1.p = 3\ncase.2.identity = hpw\n"
                                                   "case.2.space.n = 3\ncase.2.space.k = 2\n"));
    EXPECT_EQ(res.exit_code, exit_pass);
    const auto& recs = res.body["records"];
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0]["params"]["alpha"].get<double>(), 1.0);
    EXPECT_EQ(recs[1]["params"]["p"].get<double>(), 3.0);
    EXPECT_EQ(recs[2]["identity"], "hpw");
    EXPECT_GT(recs[2]["slack"].get<double>(), 0.0);
}

TEST(Verify, GroupSettings) {
    const auto strat = run(from_text("command = verify\nsetting = stratified-h1\ngroup = heisenberg\np = 3\nalpha = 2\n"
                                     "function = random\nquadrature.target_rel_err = 1e-7\n"));
    EXPECT_EQ(strat.exit_code, exit_pass);
    const auto ckn = run(from_text("command = verify\nsetting = homogeneous\ngroup = euclidean\nidentity = ckn\n"
                                   "p = 2\nq = 2\nr = 2\nb = -1\nc = -1\ndelta = 0.5\nfunction = random\n"
                                   "quadrature.target_rel_err = 1e-7\n"));
    EXPECT_EQ(ckn.exit_code, exit_pass);
    EXPECT_GE(ckn.body["records"][0]["slack"].get<double>(), -1e-9);
}

TEST(Verify, InvalidInputs) {
    EXPECT_EQ(run(from_text("command = verify\nsetting = stratified-h1\ngroup = euclidean\n")).exit_code, exit_invalid);
    EXPECT_EQ(run(from_text("command = verify\nidentity = ckn\nq = 3\n")).exit_code, exit_invalid);
    EXPECT_EQ(run(from_text("command = verify\nfunction = box-bump\n")).exit_code, exit_invalid);
    // log-hardy support must stay inside |x'| < R.
    EXPECT_EQ(run(from_text("command = verify\nidentity = log-hardy\nR = 1.5\n")).exit_code, exit_invalid);
    // inequality mode enforces the sign condition, identity mode does not.
    const std::string sign = "command = verify\nidentity = log-hardy\nspace.n = 3\nspace.k = 3\np = 2\nalpha = 0\n"
                             "beta = -3\nR = 3\nquadrature.target_rel_err = 1e-7\n";
    EXPECT_EQ(run(from_text(sign)).exit_code, exit_pass);
    EXPECT_EQ(run(from_text(sign + "mode = inequality\n")).exit_code, exit_invalid);
}

TEST(Verify, ToleranceFailureAndNonConvergence) {
    const auto wrong_factor = run(from_text("command = verify\nsetting = homogeneous\nidentity = log-hardy\n"
                                            "cp_factor = p\nfunction = random\nfunction.scale = 0.5\n"
                                            "quadrature.target_rel_err = 1e-7\n"));
    EXPECT_EQ(wrong_factor.exit_code, exit_tolerance);
    EXPECT_EQ(wrong_factor.body["status"], "tolerance-failure");
    const auto coarse = run(from_text("command = verify\nspace.n = 3\nspace.k = 2\nfunction = random\n"
                                      "quadrature.radial_nodes = 4\nquadrature.angular_nodes = 4\n"
                                      "quadrature.box_nodes = 4\nquadrature.max_refinements = 0\n"));
    EXPECT_EQ(coarse.exit_code, exit_nonconvergence);
    EXPECT_FALSE(coarse.body["records"][0]["converged"].get<bool>());
}

TEST(Verify, ZeroFunctionPasses) {
    const auto res = run(from_text("command = verify\nfunction = zero\n"));
    EXPECT_EQ(res.exit_code, exit_pass);
    EXPECT_EQ(res.body["records"][0]["lhs"].get<double>(), 0.0);
}

TEST(CpProbe, C2ReductionAndNonnegativity) {
    const auto res = run(from_text("command = cp-probe\ncp.ps = 2, 3\ncp.samples = 20000\n"));
    EXPECT_EQ(res.exit_code, exit_pass);
    const auto& recs = res.body["records"];
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_LE(recs[0]["max_abs_c2_minus_eta_sq"].get<double>(), 1e-12);
    EXPECT_FALSE(recs[1].contains("max_abs_c2_minus_eta_sq"));
    for (const auto& r : recs) {
        EXPECT_EQ(r["negatives_below_1e-12"].get<std::uint64_t>(), 0u);
        EXPECT_GT(r["empirical_cp_lower_constant"].get<double>(), 0.0);
    }
    EXPECT_EQ(run(from_text("command = cp-probe\ncp.ps = 1\n")).exit_code, exit_invalid);
}

TEST(Sweep, ShortSequenceFailsTheBand) {
    const auto res = run(from_text("command = sweep\nspace.n = 3\nspace.k = 3\np = 2\nalpha = 2\n"));
    EXPECT_EQ(res.exit_code, exit_tolerance);
    const auto& sw = res.body["records"][0];
    EXPECT_DOUBLE_EQ(sw["target_constant"].get<double>(), 0.25);
    EXPECT_FALSE(sw["within_tolerance"].get<bool>());
    EXPECT_EQ(res.body["records"].size(), 2u);
}

TEST(Sweep, DeepSequencePasses) {
    const auto res = run(from_text("command = sweep\nspace.n = 3\nspace.k = 3\np = 2\nalpha = 2\n"
                                   "sweep.eps = 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12\n"));
    EXPECT_EQ(res.exit_code, exit_pass);
    EXPECT_TRUE(res.body["records"][1]["diverges"].get<bool>());
    EXPECT_EQ(run(from_text("command = sweep\nsetting = homogeneous\n")).exit_code, exit_invalid);
}

TEST(Adjudicate, UnanimousForFactorOne) {
    const auto res = run(from_text(adjudicate_base + three_triples));
    EXPECT_EQ(res.exit_code, exit_pass);
    EXPECT_EQ(res.body["verdict"], "one");
    EXPECT_TRUE(res.body["unanimous"].get<bool>());
    EXPECT_TRUE(res.body["clear_separation"].get<bool>());
    for (const auto& r : res.body["records"]) {
        EXPECT_LE(r["rel_residual_one"].get<double>(), 1e-6);
        EXPECT_GT(r["rel_residual_p"].get<double>(), 1e-3);
    }
}

TEST(Adjudicate, RejectsTooFewTriplesAndZeroFunctions) {
    const auto one = run(from_text(adjudicate_base + "triple.0.group = euclidean\n"));
    EXPECT_EQ(one.exit_code, exit_invalid);
    EXPECT_NE(one.body["error"].get<std::string>().find("at least 3"), std::string::npos);
    EXPECT_EQ(run(from_text(adjudicate_base)).exit_code, exit_invalid);
    const auto zero = run(from_text(adjudicate_base + three_triples + "triple.1.function = zero\n"));
    EXPECT_EQ(zero.exit_code, exit_invalid);
    EXPECT_NE(zero.body["error"].get<std::string>().find("zero function"), std::string::npos);
    EXPECT_THROW((void)from_text(verify_sample + "triple.0.p = 2\n"), InvalidInput);
}

TEST(Reports, BodiesAreDeterministicPerSeed) {
    const std::string text = "command = verify\nsetting = cylindrical\nspace.n = 3\nspace.k = 2\nfunction = random\n"
                             "quadrature.target_rel_err = 1e-7\n";
    RunConfig cfg = from_text(text);
    const auto a = run(cfg), b = run(cfg);
    EXPECT_EQ(a.body.dump(), b.body.dump());
    cfg.seed = 5;
    const auto c = run(cfg);
    EXPECT_NE(a.body["records"][0]["function"], c.body["records"][0]["function"]);
    EXPECT_NE(a.body["config_hash"], c.body["config_hash"]);
}

TEST(Reports, JsonAndCsvShapes) {
    RunConfig cfg = from_text(verify_sample + "case.0.alpha = 1\ncase.1.alpha = 0.5\n");
    const auto res = run(cfg);
    const json doc = json::parse(render_json(res));
    EXPECT_EQ(doc["version"], tool_version);
    EXPECT_EQ(doc["config_hash"], res.body["config_hash"]);
    EXPECT_TRUE(doc.contains("wall_time_s"));
    EXPECT_EQ(doc["body"].dump(), res.body.dump());

    const std::string csv = render_csv(res);
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 4u);  // provenance comment, header, two rows
    EXPECT_EQ(lines[0].rfind("# hardylab", 0), 0u);
    EXPECT_NE(lines[0].find(res.body["config_hash"].get<std::string>()), std::string::npos);
    EXPECT_NE(lines[1].find("rel_residual"), std::string::npos);
    EXPECT_NE(lines[1].find("params.alpha"), std::string::npos);
    // Labels containing commas are quoted.
    EXPECT_NE(lines[2].find("\"annular-bump("), std::string::npos);
}
