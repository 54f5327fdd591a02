#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qconv/errors.hpp"

namespace qconv {

enum class ElemType : uint8_t { FP32, I8, I32 };

constexpr size_t elem_bytes(ElemType e) {
    switch (e) {
        case ElemType::I8: return 1;
        case ElemType::FP32:
        case ElemType::I32: return 4;
    }
    return 0;
}

const char* elem_name(ElemType e);

enum class LayoutTag : uint8_t { NCHW, NHWC, OIHW, NCHWc, NHWC_WC_packed, InterleavedPanel };

// Axis-order tag plus the block size for blocked layouts. NCHWc blocks channels
// by `block` (4, 8 or 16); InterleavedPanel is the 4xK panel feeding the int8
// 4x4 matmul micro-kernel, so its row count is pinned to 4.
struct Layout {
    LayoutTag tag = LayoutTag::NCHW;
    int32_t block = 0;

    static Layout nchw() { return {LayoutTag::NCHW, 0}; }
    static Layout nhwc() { return {LayoutTag::NHWC, 0}; }
    static Layout oihw() { return {LayoutTag::OIHW, 0}; }
    static Layout nchwc(int32_t block = 16);
    static Layout wc_packed() { return {LayoutTag::NHWC_WC_packed, 0}; }
    static Layout interleaved_panel() { return {LayoutTag::InterleavedPanel, 4}; }

    bool operator==(const Layout&) const = default;
};

std::string layout_name(const Layout& l);

// Dense tensor: shape, layout, element type, contiguous buffer in the layout's
// canonical iteration order. Blocked layouts carry the padded shape (e.g. a
// packed NCHWc tensor is rank 5 with trailing extent = block). Treated as
// immutable once filled; layout transforms return new tensors.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Layout layout, ElemType elem, std::vector<int64_t> shape);
    // Wraps caller-owned memory without taking ownership.
    static Tensor wrap(void* data, Layout layout, ElemType elem, std::vector<int64_t> shape);

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t dim(size_t i) const { return shape_.at(i); }
    size_t rank() const { return shape_.size(); }
    Layout layout() const { return layout_; }
    ElemType elem() const { return elem_; }
    int64_t numel() const { return numel_; }
    size_t byte_size() const { return size_t(numel_) * elem_bytes(elem_); }
    bool defined() const { return data_ != nullptr; }

    // Row-major linear index over shape(); the buffer is always stored in
    // this order for the tensor's layout.
    int64_t linear_index(std::span<const int64_t> idx) const;

    template <typename T>
    const T* data() const {
        check_type<T>();
        return reinterpret_cast<const T*>(data_.get());
    }
    template <typename T>
    T* data() {
        check_type<T>();
        return reinterpret_cast<T*>(data_.get());
    }
    const void* raw() const { return data_.get(); }
    void* raw() { return data_.get(); }

    Tensor clone() const;

private:
    template <typename T>
    void check_type() const;

    std::vector<int64_t> shape_;
    Layout layout_;
    ElemType elem_ = ElemType::FP32;
    int64_t numel_ = 0;
    std::shared_ptr<std::byte[]> data_;
};

template <typename T>
void Tensor::check_type() const {
    constexpr bool is_f32 = std::is_same_v<T, float>;
    constexpr bool is_i8 = std::is_same_v<T, int8_t>;
    constexpr bool is_i32 = std::is_same_v<T, int32_t>;
    static_assert(is_f32 || is_i8 || is_i32, "unsupported element type");
    ElemType want = is_f32 ? ElemType::FP32 : (is_i8 ? ElemType::I8 : ElemType::I32);
    if (want != elem_)
        fail(ErrorKind::TypeMismatch,
             std::string("tensor holds ") + elem_name(elem_) + ", accessed as " + elem_name(want));
}

// ---------------------------------------------------------------------------
// Layout transforms
// ---------------------------------------------------------------------------

// NCHW -> NCHWc: output shape (N, ceil(C/block), H, W, block), channels past C
// zero-padded. Element (n,c,h,w) lands at (n, c/block, h, w, c%block).
Tensor pack_nchw_to_nchwc(const Tensor& t, int32_t block);

// Exact inverse of pack on the logical region; padding lanes are dropped.
Tensor unpack_nchwc_to_nchw(const Tensor& t, int64_t original_c);

// NCHW <-> NHWC, logical values preserved. Applying twice is the identity.
Tensor transpose_nchw_nhwc(const Tensor& t);

// Raw variants used by the kernels to pack into caller-provided scratch.
namespace detail {

template <typename T>
void pack_nchw_to_nchwc(const T* src, T* dst, int64_t n, int64_t c, int64_t h, int64_t w,
                        int64_t block) {
    const int64_t cb = (c + block - 1) / block;
    std::memset(dst, 0, size_t(n * cb * h * w * block) * sizeof(T));
    for (int64_t in = 0; in < n; ++in)
        for (int64_t ic = 0; ic < c; ++ic) {
            const T* s = src + ((in * c + ic) * h) * w;
            T* d = dst + (((in * cb + ic / block) * h) * w) * block + ic % block;
            for (int64_t i = 0; i < h * w; ++i) d[i * block] = s[i];
        }
}

template <typename T>
void unpack_nchwc_to_nchw(const T* src, T* dst, int64_t n, int64_t c, int64_t h, int64_t w,
                          int64_t block) {
    const int64_t cb = (c + block - 1) / block;
    for (int64_t in = 0; in < n; ++in)
        for (int64_t ic = 0; ic < c; ++ic) {
            const T* s = src + (((in * cb + ic / block) * h) * w) * block + ic % block;
            T* d = dst + ((in * c + ic) * h) * w;
            for (int64_t i = 0; i < h * w; ++i) d[i] = s[i * block];
        }
}

template <typename T>
void transpose_nchw_to_nhwc(const T* src, T* dst, int64_t n, int64_t c, int64_t h, int64_t w) {
    for (int64_t in = 0; in < n; ++in)
        for (int64_t ic = 0; ic < c; ++ic)
            for (int64_t ih = 0; ih < h; ++ih)
                for (int64_t iw = 0; iw < w; ++iw)
                    dst[((in * h + ih) * w + iw) * c + ic] = src[((in * c + ic) * h + ih) * w + iw];
}

template <typename T>
void transpose_nhwc_to_nchw(const T* src, T* dst, int64_t n, int64_t h, int64_t w, int64_t c) {
    for (int64_t in = 0; in < n; ++in)
        for (int64_t ih = 0; ih < h; ++ih)
            for (int64_t iw = 0; iw < w; ++iw)
                for (int64_t ic = 0; ic < c; ++ic)
                    dst[((in * c + ic) * h + ih) * w + iw] = src[((in * h + ih) * w + iw) * c + ic];
}

} // namespace detail

// ---------------------------------------------------------------------------
// Deterministic tensor initialization (seeded, platform-independent)
// ---------------------------------------------------------------------------

// splitmix64; used for weight/input generation so fixtures are reproducible
// bit-for-bit across runs and compilers.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1) with 24 bits of mantissa, exact in fp32
    float next_unit_f32() { return float(next() >> 40) * 0x1p-24f; }
    float next_f32(float lo, float hi) { return lo + (hi - lo) * next_unit_f32(); }
};

Tensor seeded_uniform(Layout layout, std::vector<int64_t> shape, uint64_t seed, float lo, float hi);
Tensor seeded_codes(Layout layout, std::vector<int64_t> shape, uint64_t seed); // int8 in [-127, 127]

} // namespace qconv
