#include "qconv/tensor.hpp"

#include <algorithm>

namespace qconv {

const char* elem_name(ElemType e) {
    switch (e) {
        case ElemType::FP32: return "f32";
        case ElemType::I8: return "i8";
        case ElemType::I32: return "i32";
    }
    return "?";
}

Layout Layout::nchwc(int32_t block) {
    if (block != 4 && block != 8 && block != 16)
        fail(ErrorKind::InvalidArgument, "NCHWc block must be 4, 8 or 16, got " + std::to_string(block));
    return {LayoutTag::NCHWc, block};
}

std::string layout_name(const Layout& l) {
    switch (l.tag) {
        case LayoutTag::NCHW: return "nchw";
        case LayoutTag::NHWC: return "nhwc";
        case LayoutTag::OIHW: return "oihw";
        case LayoutTag::NCHWc: return "nchw" + std::to_string(l.block) + "c";
        case LayoutTag::NHWC_WC_packed: return "nhwc_wc_packed";
        case LayoutTag::InterleavedPanel: return "interleaved_panel";
    }
    return "?";
}

static int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d <= 0) fail(ErrorKind::InvalidArgument, "tensor extents must be positive");
        n *= d;
    }
    return n;
}

Tensor Tensor::zeros(Layout layout, ElemType elem, std::vector<int64_t> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.layout_ = layout;
    t.elem_ = elem;
    t.numel_ = shape_numel(t.shape_);
    const size_t bytes = size_t(t.numel_) * elem_bytes(elem);
    t.data_ = std::shared_ptr<std::byte[]>(new std::byte[bytes]);
    std::memset(t.data_.get(), 0, bytes);
    return t;
}

Tensor Tensor::wrap(void* data, Layout layout, ElemType elem, std::vector<int64_t> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.layout_ = layout;
    t.elem_ = elem;
    t.numel_ = shape_numel(t.shape_);
    t.data_ = std::shared_ptr<std::byte[]>(static_cast<std::byte*>(data), [](std::byte*) {});
    return t;
}

int64_t Tensor::linear_index(std::span<const int64_t> idx) const {
    if (idx.size() != shape_.size())
        fail(ErrorKind::InvalidArgument, "index rank does not match tensor rank");
    int64_t off = 0;
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= shape_[i])
            fail(ErrorKind::InvalidArgument, "index out of range");
        off = off * shape_[i] + idx[i];
    }
    return off;
}

Tensor Tensor::clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.layout_ = layout_;
    t.elem_ = elem_;
    t.numel_ = numel_;
    const size_t bytes = byte_size();
    t.data_ = std::shared_ptr<std::byte[]>(new std::byte[bytes]);
    std::memcpy(t.data_.get(), data_.get(), bytes);
    return t;
}

// ---------------------------------------------------------------------------
// Layout transforms
// ---------------------------------------------------------------------------

Tensor pack_nchw_to_nchwc(const Tensor& t, int32_t block) {
    if (t.layout().tag != LayoutTag::NCHW)
        fail(ErrorKind::LayoutMismatch, "pack_nchw_to_nchwc expects NCHW, got " + layout_name(t.layout()));
    if (t.rank() != 4) fail(ErrorKind::ShapeMismatch, "pack_nchw_to_nchwc expects rank 4");
    const Layout out_layout = Layout::nchwc(block); // validates block
    const int64_t n = t.dim(0), c = t.dim(1), h = t.dim(2), w = t.dim(3);
    const int64_t cb = (c + block - 1) / block;
    Tensor out = Tensor::zeros(out_layout, t.elem(), {n, cb, h, w, block});
    switch (t.elem()) {
        case ElemType::FP32:
            detail::pack_nchw_to_nchwc(t.data<float>(), out.data<float>(), n, c, h, w, block);
            break;
        case ElemType::I8:
            detail::pack_nchw_to_nchwc(t.data<int8_t>(), out.data<int8_t>(), n, c, h, w, block);
            break;
        case ElemType::I32:
            detail::pack_nchw_to_nchwc(t.data<int32_t>(), out.data<int32_t>(), n, c, h, w, block);
            break;
    }
    return out;
}

Tensor unpack_nchwc_to_nchw(const Tensor& t, int64_t original_c) {
    if (t.layout().tag != LayoutTag::NCHWc)
        fail(ErrorKind::LayoutMismatch, "unpack_nchwc_to_nchw expects NCHWc, got " + layout_name(t.layout()));
    if (t.rank() != 5) fail(ErrorKind::ShapeMismatch, "unpack_nchwc_to_nchw expects rank 5");
    const int64_t block = t.layout().block;
    const int64_t n = t.dim(0), cb = t.dim(1), h = t.dim(2), w = t.dim(3);
    if (t.dim(4) != block) fail(ErrorKind::ShapeMismatch, "inner extent does not match layout block");
    if (original_c <= 0 || original_c > cb * block)
        fail(ErrorKind::InvalidArgument, "original_c exceeds packed capacity");
    Tensor out = Tensor::zeros(Layout::nchw(), t.elem(), {n, original_c, h, w});
    switch (t.elem()) {
        case ElemType::FP32:
            detail::unpack_nchwc_to_nchw(t.data<float>(), out.data<float>(), n, original_c, h, w, block);
            break;
        case ElemType::I8:
            detail::unpack_nchwc_to_nchw(t.data<int8_t>(), out.data<int8_t>(), n, original_c, h, w, block);
            break;
        case ElemType::I32:
            detail::unpack_nchwc_to_nchw(t.data<int32_t>(), out.data<int32_t>(), n, original_c, h, w, block);
            break;
    }
    return out;
}

template <typename T>
static void transpose_dispatch(const Tensor& t, Tensor& out) {
    if (t.layout().tag == LayoutTag::NCHW)
        detail::transpose_nchw_to_nhwc(t.data<T>(), out.data<T>(), t.dim(0), t.dim(1), t.dim(2), t.dim(3));
    else
        detail::transpose_nhwc_to_nchw(t.data<T>(), out.data<T>(), t.dim(0), t.dim(1), t.dim(2), t.dim(3));
}

Tensor transpose_nchw_nhwc(const Tensor& t) {
    const LayoutTag tag = t.layout().tag;
    if (tag != LayoutTag::NCHW && tag != LayoutTag::NHWC)
        fail(ErrorKind::LayoutMismatch, "transpose_nchw_nhwc expects NCHW or NHWC, got " + layout_name(t.layout()));
    if (t.rank() != 4) fail(ErrorKind::ShapeMismatch, "transpose_nchw_nhwc expects rank 4");
    std::vector<int64_t> out_shape;
    Layout out_layout;
    if (tag == LayoutTag::NCHW) {
        out_shape = {t.dim(0), t.dim(2), t.dim(3), t.dim(1)};
        out_layout = Layout::nhwc();
    } else {
        out_shape = {t.dim(0), t.dim(3), t.dim(1), t.dim(2)};
        out_layout = Layout::nchw();
    }
    Tensor out = Tensor::zeros(out_layout, t.elem(), std::move(out_shape));
    switch (t.elem()) {
        case ElemType::FP32: transpose_dispatch<float>(t, out); break;
        case ElemType::I8: transpose_dispatch<int8_t>(t, out); break;
        case ElemType::I32: transpose_dispatch<int32_t>(t, out); break;
    }
    return out;
}

Tensor seeded_uniform(Layout layout, std::vector<int64_t> shape, uint64_t seed, float lo, float hi) {
    Tensor t = Tensor::zeros(layout, ElemType::FP32, std::move(shape));
    SplitMix64 rng(seed);
    float* p = t.data<float>();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = rng.next_f32(lo, hi);
    return t;
}

Tensor seeded_codes(Layout layout, std::vector<int64_t> shape, uint64_t seed) {
    Tensor t = Tensor::zeros(layout, ElemType::I8, std::move(shape));
    SplitMix64 rng(seed);
    int8_t* p = t.data<int8_t>();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = int8_t(int64_t(rng.next() % 255) - 127);
    return t;
}

} // namespace qconv
