#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qconv/graph/executor.hpp"
#include "qconv/model/mini_resnet.hpp"

#include "support/oracles.hpp"

using namespace qconv;

namespace {

int64_t count_ops(const GraphIR& g, OpKind kind) {
    int64_t n = 0;
    for (const Node& node : g.nodes) n += node.op == kind;
    return n;
}

} // namespace

TEST_CASE("default config conv count follows the construction rule") {
    MiniResNetConfig cfg;
    GraphIR g = build_mini_resnet(cfg, Layout::nchw());
    // 2 convs per block x 2 blocks x 2 stages, plus the stem, plus one
    // projection at the stage-1 transition
    const int64_t expected = 2 * cfg.blocks_per_stage * int64_t(cfg.stage_multipliers.size()) + 1 + 1;
    CHECK(count_ops(g, OpKind::CONV2D) == expected);
    CHECK(mini_resnet_conv_count(cfg) == expected);
    CHECK(count_ops(g, OpKind::GLOBAL_AVG_POOL) == 1);
    CHECK(count_ops(g, OpKind::DENSE) == 1);
    CHECK(count_ops(g, OpKind::ADD) == int64_t(cfg.stage_multipliers.size()) * cfg.blocks_per_stage);
}

TEST_CASE("zero blocks per stage degenerates to stem + pool + dense") {
    MiniResNetConfig cfg;
    cfg.blocks_per_stage = 0;
    GraphIR g = build_mini_resnet(cfg, Layout::nchw());
    CHECK(count_ops(g, OpKind::CONV2D) == 1);
    CHECK(count_ops(g, OpKind::ADD) == 0);
    CHECK(count_ops(g, OpKind::GLOBAL_AVG_POOL) == 1);
    CHECK(count_ops(g, OpKind::DENSE) == 1);
    CHECK(mini_resnet_conv_count(cfg) == 1);
}

TEST_CASE("same seed builds bit-identical weights and outputs") {
    MiniResNetConfig cfg;
    cfg.seed = 4242;
    GraphIR a = build_mini_resnet(cfg, Layout::nchw());
    GraphIR b = build_mini_resnet(cfg, Layout::nchw());
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (size_t i = 0; i < a.nodes.size(); ++i)
        if (a.nodes[i].weight.defined())
            CHECK(oracle::bits_equal(a.nodes[i].weight, b.nodes[i].weight));
    Tensor input = seeded_uniform(Layout::nchw(), a.inputs[0].shape, 1, -1.0f, 1.0f);
    const std::vector<Tensor> inputs{input};
    CHECK(oracle::bits_equal(oracle::interpret(a, inputs)[0], oracle::interpret(b, inputs)[0]));
}

TEST_CASE("output shape is (batch, classes) across configs") {
    for (int64_t batch : {int64_t(1), int64_t(3)}) {
        MiniResNetConfig cfg;
        cfg.batch = batch;
        cfg.num_classes = 7;
        cfg.input_size = 16;
        for (Layout layout : {Layout::nchw(), Layout::nhwc()}) {
            GraphIR g = build_mini_resnet(cfg, layout);
            const std::vector<ValueInfo> values = g.infer_values();
            const ValueInfo& out = values.at(size_t(g.outputs.at(0)));
            CHECK(out.shape == std::vector<int64_t>{batch, 7});
        }
    }
}

TEST_CASE("nchw and nhwc builds agree within fp32 tolerance for equal seeds") {
    MiniResNetConfig cfg;
    cfg.seed = 321;
    cfg.input_size = 16;
    GraphIR nchw = build_mini_resnet(cfg, Layout::nchw());
    GraphIR nhwc = build_mini_resnet(cfg, Layout::nhwc());
    // same weights regardless of activation layout
    for (size_t i = 0; i < nchw.nodes.size(); ++i)
        if (nchw.nodes[i].weight.defined())
            CHECK(oracle::bits_equal(nchw.nodes[i].weight, nhwc.nodes[i].weight));

    Tensor input = seeded_uniform(Layout::nchw(), nchw.inputs[0].shape, 5, -1.0f, 1.0f);
    const std::vector<Tensor> in_nchw{input};
    const std::vector<Tensor> in_nhwc{transpose_nchw_nhwc(input)};
    Tensor a = oracle::interpret(nchw, in_nchw)[0];
    Tensor b = oracle::interpret(nhwc, in_nhwc)[0];
    CHECK(oracle::normalized_max_error(b, a) <= 1e-5);
}

TEST_CASE("builder validates its configuration") {
    MiniResNetConfig cfg;
    cfg.input_size = 31; // not divisible by the stage-1 downsample
    CHECK_THROWS_AS(build_mini_resnet(cfg, Layout::nchw()), Error);
    cfg = {};
    cfg.stem_channels = 0;
    CHECK_THROWS_AS(build_mini_resnet(cfg, Layout::nchw()), Error);
    cfg = {};
    cfg.stage_multipliers = {1, 0};
    CHECK_THROWS_AS(build_mini_resnet(cfg, Layout::nchw()), Error);
    cfg = {};
    CHECK_THROWS_AS(build_mini_resnet(cfg, Layout::oihw()), Error);
    try {
        build_mini_resnet(cfg, Layout::oihw());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("serialization works for both layouts") {
    MiniResNetConfig cfg;
    cfg.input_size = 16;
    for (Layout layout : {Layout::nchw(), Layout::nhwc()}) {
        GraphIR g = build_mini_resnet(cfg, layout);
        g.infer_values();
    }
}
