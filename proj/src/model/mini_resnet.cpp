#include "qconv/model/mini_resnet.hpp"

#include "qconv/graph/serialize.hpp"

namespace qconv {

namespace {

void validate(const MiniResNetConfig& cfg, Layout layout) {
    if (cfg.stem_channels <= 0 || cfg.input_size <= 0 || cfg.input_channels <= 0 ||
        cfg.num_classes <= 0 || cfg.batch <= 0 || cfg.blocks_per_stage < 0 ||
        cfg.stage_multipliers.empty())
        fail(ErrorKind::InvalidArgument, "mini-resnet config extents must be positive");
    for (int m : cfg.stage_multipliers)
        if (m <= 0) fail(ErrorKind::InvalidArgument, "stage multipliers must be positive");
    if (layout.tag != LayoutTag::NCHW && layout.tag != LayoutTag::NHWC)
        fail(ErrorKind::InvalidArgument, "mini-resnet builds NCHW or NHWC graphs");
    int64_t total_stride = 1;
    for (size_t s = 1; s < cfg.stage_multipliers.size(); ++s) total_stride *= 2;
    if (cfg.blocks_per_stage == 0) total_stride = 1;
    if (cfg.input_size % total_stride != 0)
        fail(ErrorKind::InvalidArgument, "input size must be divisible by the total stride");
}

struct Builder {
    GraphIR g;
    Layout layout;
    ScheduleKind conv_schedule;
    SplitMix64 seeds;

    int32_t conv(int32_t src, int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride,
                 int64_t pad) {
        Node n;
        n.op = OpKind::CONV2D;
        n.inputs = {src};
        n.schedule = conv_schedule;
        n.conv = {stride, pad, k, k, in_ch, out_ch};
        n.weight_seed = seeds.next();
        n.weight = init_param(Layout::oihw(), {out_ch, in_ch, k, k}, n.weight_seed);
        return g.add_node(std::move(n));
    }

    int32_t relu(int32_t src) {
        Node n;
        n.op = OpKind::RELU;
        n.inputs = {src};
        return g.add_node(std::move(n));
    }

    int32_t add(int32_t a, int32_t b) {
        Node n;
        n.op = OpKind::ADD;
        n.inputs = {a, b};
        return g.add_node(std::move(n));
    }
};

} // namespace

GraphIR build_mini_resnet(const MiniResNetConfig& cfg, Layout layout) {
    validate(cfg, layout);
    Builder b{{},
              layout,
              layout.tag == LayoutTag::NHWC ? ScheduleKind::NHWC_SPATIAL_PACK_FP32
                                            : ScheduleKind::NCHW_SPATIAL_PACK_FP32,
              SplitMix64(cfg.seed)};

    const std::vector<int64_t> in_shape =
        layout.tag == LayoutTag::NHWC
            ? std::vector<int64_t>{cfg.batch, cfg.input_size, cfg.input_size, cfg.input_channels}
            : std::vector<int64_t>{cfg.batch, cfg.input_channels, cfg.input_size, cfg.input_size};
    int32_t x = b.g.add_input({in_shape, layout, ElemType::FP32});

    x = b.relu(b.conv(x, cfg.input_channels, cfg.stem_channels, 3, 1, 1));
    int64_t channels = cfg.stem_channels;

    for (size_t stage = 0; stage < cfg.stage_multipliers.size(); ++stage) {
        const int64_t out_ch = cfg.stem_channels * cfg.stage_multipliers[stage];
        for (int block = 0; block < cfg.blocks_per_stage; ++block) {
            const int64_t stride = (stage > 0 && block == 0) ? 2 : 1;
            const bool project = stride != 1 || channels != out_ch;
            // Downsampling sites use 2x2 stride-2 kernels: output extents must
            // divide exactly, and odd kernels at stride 2 cannot halve the even
            // spatial sizes this model runs at. Channel-only projections stay 1x1.
            const int64_t dk = stride == 2 ? 2 : 1;
            const int64_t dp = 0;
            const int32_t shortcut = project ? b.conv(x, channels, out_ch, dk, stride, dp) : x;
            int32_t y = stride == 2 ? b.relu(b.conv(x, channels, out_ch, 2, 2, 0))
                                    : b.relu(b.conv(x, channels, out_ch, 3, 1, 1));
            y = b.conv(y, out_ch, out_ch, 3, 1, 1);
            x = b.relu(b.add(y, shortcut));
            channels = out_ch;
        }
    }

    Node gap;
    gap.op = OpKind::GLOBAL_AVG_POOL;
    gap.inputs = {x};
    x = b.g.add_node(std::move(gap));

    Node dense;
    dense.op = OpKind::DENSE;
    dense.inputs = {x};
    dense.units = cfg.num_classes;
    dense.weight_seed = b.seeds.next();
    dense.weight = init_param(Layout::nchw(), {cfg.num_classes, channels}, dense.weight_seed);
    x = b.g.add_node(std::move(dense));

    b.g.outputs = {x};
    b.g.infer_values(); // sanity check
    return std::move(b.g);
}

int64_t mini_resnet_conv_count(const MiniResNetConfig& cfg) {
    int64_t convs = 1; // stem
    int64_t channels = cfg.stem_channels;
    for (size_t stage = 0; stage < cfg.stage_multipliers.size(); ++stage) {
        const int64_t out_ch = cfg.stem_channels * cfg.stage_multipliers[stage];
        for (int block = 0; block < cfg.blocks_per_stage; ++block) {
            const int64_t stride = (stage > 0 && block == 0) ? 2 : 1;
            convs += 2 + ((stride != 1 || channels != out_ch) ? 1 : 0);
            channels = out_ch;
        }
    }
    return convs;
}

} // namespace qconv
