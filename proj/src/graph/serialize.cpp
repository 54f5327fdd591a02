#include "qconv/graph/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qconv {

Tensor init_param(Layout layout, std::vector<int64_t> shape, uint64_t seed) {
    return seeded_uniform(layout, std::move(shape), seed, -0.5f, 0.5f);
}

namespace {

std::string shape_str(const std::vector<int64_t>& shape) {
    std::string s;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s;
}

[[noreturn]] void parse_fail(size_t line_no, const std::string& msg) {
    fail(ErrorKind::InvalidArgument,
         "graph text line " + std::to_string(line_no) + ": " + msg);
}

struct LineParser {
    std::vector<std::string> tokens;
    size_t line_no;

    // key=value attribute lookup over tokens[from..]
    std::string attr(size_t from, const std::string& key, bool required = true) const {
        const std::string prefix = key + "=";
        for (size_t i = from; i < tokens.size(); ++i)
            if (tokens[i].rfind(prefix, 0) == 0) return tokens[i].substr(prefix.size());
        if (required) parse_fail(line_no, "missing attribute " + key);
        return {};
    }

    int64_t attr_int(size_t from, const std::string& key) const {
        const std::string v = attr(from, key);
        int64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            parse_fail(line_no, "bad integer for " + key + ": " + v);
        return out;
    }

    uint64_t attr_u64(size_t from, const std::string& key) const {
        const std::string v = attr(from, key);
        uint64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            parse_fail(line_no, "bad integer for " + key + ": " + v);
        return out;
    }
};

std::vector<int64_t> parse_shape(const std::string& s, size_t line_no) {
    std::vector<int64_t> shape;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t next = s.find('x', pos);
        if (next == std::string::npos) next = s.size();
        int64_t d = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + next, d);
        if (ec != std::errc() || p != s.data() + next || d <= 0)
            parse_fail(line_no, "bad shape: " + s);
        shape.push_back(d);
        pos = next + 1;
    }
    if (shape.empty()) parse_fail(line_no, "empty shape");
    return shape;
}

std::vector<int32_t> parse_id_list(const std::string& s, size_t line_no) {
    std::vector<int32_t> ids;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        int32_t v = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + next, v);
        if (ec != std::errc() || p != s.data() + next || v < 0)
            parse_fail(line_no, "bad id list: " + s);
        ids.push_back(v);
        pos = next + 1;
        if (next == s.size()) break;
    }
    return ids;
}

} // namespace

std::string write_graph_text(const GraphIR& g) {
    g.infer_values(); // validate before writing
    std::ostringstream out;
    out << "# qconv graph v1\n";
    for (size_t i = 0; i < g.inputs.size(); ++i) {
        const ValueInfo& v = g.inputs[i];
        if (v.elem != ElemType::FP32)
            fail(ErrorKind::UnsupportedOp, "only fp32 graphs serialize to text");
        out << "input " << i << ' ' << elem_name(v.elem) << ' ' << layout_name(v.layout) << ' '
            << shape_str(v.shape) << '\n';
    }
    for (const Node& n : g.nodes) {
        switch (n.op) {
            case OpKind::CONV2D:
                if (schedule_is_int8(n.schedule))
                    fail(ErrorKind::UnsupportedOp, "only fp32 graphs serialize to text");
                out << n.id << " conv2d in=" << n.inputs.at(0) << " o=" << n.conv.out_channels
                    << " k=" << n.conv.kh << 'x' << n.conv.kw << " stride=" << n.conv.stride
                    << " pad=" << n.conv.pad << " schedule=" << schedule_name(n.schedule)
                    << " wseed=" << n.weight_seed << '\n';
                break;
            case OpKind::DENSE:
                if (n.weight.elem() != ElemType::FP32)
                    fail(ErrorKind::UnsupportedOp, "only fp32 graphs serialize to text");
                out << n.id << " dense in=" << n.inputs.at(0) << " units=" << n.units
                    << " wseed=" << n.weight_seed << '\n';
                break;
            case OpKind::RELU:
                out << n.id << " relu in=" << n.inputs.at(0) << '\n';
                break;
            case OpKind::ADD:
                out << n.id << " add in=" << n.inputs.at(0) << ',' << n.inputs.at(1) << '\n';
                break;
            case OpKind::GLOBAL_AVG_POOL:
                out << n.id << " global_avg_pool in=" << n.inputs.at(0) << '\n';
                break;
            default: fail(ErrorKind::UnsupportedOp, "only fp32 graphs serialize to text");
        }
    }
    out << "output";
    for (size_t i = 0; i < g.outputs.size(); ++i) out << (i ? "," : " ") << g.outputs[i];
    out << '\n';
    return out.str();
}

GraphIR read_graph_text(const std::string& text) {
    GraphIR g;
    std::vector<ValueInfo> infos; // running inference for weight construction
    bool saw_output = false;

    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        LineParser p{tok, line_no};

        if (tok[0] == "input") {
            if (tok.size() != 5) parse_fail(line_no, "input lines are: input <id> <elem> <layout> <shape>");
            if (tok[2] != "f32") parse_fail(line_no, "only f32 graph inputs are supported");
            Layout layout;
            if (tok[3] == "nchw") layout = Layout::nchw();
            else if (tok[3] == "nhwc") layout = Layout::nhwc();
            else parse_fail(line_no, "unknown input layout: " + tok[3]);
            ValueInfo v{parse_shape(tok[4], line_no), layout, ElemType::FP32};
            const int32_t id = g.add_input(v);
            if (id != int32_t(std::stol(tok[1])))
                parse_fail(line_no, "input ids must be dense and in order");
            infos.push_back(std::move(v));
            continue;
        }
        if (tok[0] == "output") {
            if (tok.size() != 2) parse_fail(line_no, "output lines are: output <id>[,<id>...]");
            g.outputs = parse_id_list(tok[1], line_no);
            saw_output = true;
            continue;
        }

        // node line: <id> <op> in=... attrs
        if (tok.size() < 3) parse_fail(line_no, "node lines are: <id> <op> in=<ids> ...");
        const std::string& op = tok[1];
        Node n;
        n.inputs = parse_id_list(p.attr(2, "in"), line_no);
        for (int32_t v : n.inputs)
            if (size_t(v) >= infos.size()) parse_fail(line_no, "node input id out of range");

        if (op == "conv2d") {
            const ValueInfo& src = infos.at(size_t(n.inputs.at(0)));
            if (src.shape.size() != 4) parse_fail(line_no, "conv2d input must be rank 4");
            n.op = OpKind::CONV2D;
            n.schedule = parse_schedule(p.attr(2, "schedule"));
            const std::string k = p.attr(2, "k");
            const size_t xpos = k.find('x');
            if (xpos == std::string::npos) parse_fail(line_no, "bad kernel extents: " + k);
            n.conv.kh = std::stoll(k.substr(0, xpos));
            n.conv.kw = std::stoll(k.substr(xpos + 1));
            n.conv.stride = p.attr_int(2, "stride");
            n.conv.pad = p.attr_int(2, "pad");
            n.conv.out_channels = p.attr_int(2, "o");
            n.conv.in_channels =
                src.layout.tag == LayoutTag::NHWC ? src.shape[3] : src.shape[1];
            n.weight_seed = p.attr_u64(2, "wseed");
            n.weight = init_param(Layout::oihw(),
                                  {n.conv.out_channels, n.conv.in_channels, n.conv.kh, n.conv.kw},
                                  n.weight_seed);
        } else if (op == "dense") {
            const ValueInfo& src = infos.at(size_t(n.inputs.at(0)));
            if (src.shape.size() != 2) parse_fail(line_no, "dense input must be rank 2");
            n.op = OpKind::DENSE;
            n.units = p.attr_int(2, "units");
            n.weight_seed = p.attr_u64(2, "wseed");
            n.weight = init_param(Layout::nchw(), {n.units, src.shape[1]}, n.weight_seed);
        } else if (op == "relu") {
            n.op = OpKind::RELU;
        } else if (op == "add") {
            n.op = OpKind::ADD;
        } else if (op == "global_avg_pool") {
            n.op = OpKind::GLOBAL_AVG_POOL;
        } else {
            parse_fail(line_no, "unknown op: " + op);
        }

        const int32_t id = g.add_node(std::move(n));
        if (id != int32_t(std::stol(tok[0]))) parse_fail(line_no, "node ids must be dense and in order");
        infos.push_back(infer_node_output(g.nodes.back(), infos));
    }

    if (!saw_output) fail(ErrorKind::InvalidArgument, "graph text has no output line");
    g.infer_values(); // final validation
    return g;
}

GraphIR read_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::InvalidArgument, "cannot open graph file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return read_graph_text(ss.str());
}

void write_graph_file(const GraphIR& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::InvalidArgument, "cannot open graph file for writing: " + path);
    f << write_graph_text(g);
}

} // namespace qconv
