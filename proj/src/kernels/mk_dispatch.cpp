#include "qconv/kernels/microkernels.hpp"

#include <atomic>

namespace qconv {

#if defined(QCONV_WITH_AVX2)
namespace avx2 {
int32_t dot_i8(const int8_t*, const int8_t*, size_t);
void mmla_4x4_i8(const int8_t*, const int8_t*, size_t, int32_t*);
} // namespace avx2
#endif
#if defined(QCONV_WITH_NEON)
namespace neon {
int32_t dot_i8(const int8_t*, const int8_t*, size_t);
void mmla_4x4_i8(const int8_t*, const int8_t*, size_t, int32_t*);
} // namespace neon
#endif

static const MicrokernelTable kScalarTable{"scalar", &scalar::dot_i8, &scalar::mmla_4x4_i8};
#if defined(QCONV_WITH_AVX2)
static const MicrokernelTable kAvx2Table{"avx2", &avx2::dot_i8, &avx2::mmla_4x4_i8};
#endif
#if defined(QCONV_WITH_NEON)
static const MicrokernelTable kNeonTable{"neon", &neon::dot_i8, &neon::mmla_4x4_i8};
#endif

const char* backend_name(MicrokernelBackend b) {
    switch (b) {
        case MicrokernelBackend::Auto: return "auto";
        case MicrokernelBackend::Scalar: return "scalar";
        case MicrokernelBackend::Avx2: return "avx2";
        case MicrokernelBackend::Neon: return "neon";
    }
    return "?";
}

static bool backend_available(MicrokernelBackend b) {
    switch (b) {
        case MicrokernelBackend::Auto:
        case MicrokernelBackend::Scalar: return true;
        case MicrokernelBackend::Avx2:
#if defined(QCONV_WITH_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case MicrokernelBackend::Neon:
#if defined(QCONV_WITH_NEON)
            return true; // baseline on aarch64
#else
            return false;
#endif
    }
    return false;
}

static const MicrokernelTable* table_for(MicrokernelBackend b) {
    switch (b) {
        case MicrokernelBackend::Scalar: return &kScalarTable;
#if defined(QCONV_WITH_AVX2)
        case MicrokernelBackend::Avx2: return &kAvx2Table;
#endif
#if defined(QCONV_WITH_NEON)
        case MicrokernelBackend::Neon: return &kNeonTable;
#endif
        default: return nullptr;
    }
}

static const MicrokernelTable* pick_auto() {
    if (backend_available(MicrokernelBackend::Avx2)) return table_for(MicrokernelBackend::Avx2);
    if (backend_available(MicrokernelBackend::Neon)) return table_for(MicrokernelBackend::Neon);
    return &kScalarTable;
}

static std::atomic<const MicrokernelTable*> g_active{nullptr};

const MicrokernelTable& active_microkernels() {
    const MicrokernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = pick_auto();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void set_microkernel_backend(MicrokernelBackend b) {
    if (b == MicrokernelBackend::Auto) {
        g_active.store(pick_auto(), std::memory_order_release);
        return;
    }
    if (!backend_available(b))
        fail(ErrorKind::NotApplicable,
             std::string("microkernel backend not available on this cpu: ") + backend_name(b));
    g_active.store(table_for(b), std::memory_order_release);
}

std::vector<MicrokernelBackend> available_microkernel_backends() {
    std::vector<MicrokernelBackend> v{MicrokernelBackend::Scalar};
    if (backend_available(MicrokernelBackend::Avx2)) v.push_back(MicrokernelBackend::Avx2);
    if (backend_available(MicrokernelBackend::Neon)) v.push_back(MicrokernelBackend::Neon);
    return v;
}

Tensor mmla_4x4_i8(const Tensor& a, const Tensor& b) {
    if (a.layout().tag != LayoutTag::InterleavedPanel || b.layout().tag != LayoutTag::InterleavedPanel)
        fail(ErrorKind::LayoutMismatch, "mmla_4x4_i8 expects InterleavedPanel operands");
    if (a.elem() != ElemType::I8 || b.elem() != ElemType::I8)
        fail(ErrorKind::TypeMismatch, "mmla_4x4_i8 expects int8 panels");
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != 4 || b.dim(0) != 4)
        fail(ErrorKind::ShapeMismatch, "mmla_4x4_i8 panels must be 4xK");
    if (a.dim(1) != b.dim(1))
        fail(ErrorKind::ShapeMismatch, "mmla_4x4_i8 panels have mismatched K");
    if (a.dim(1) % 4 != 0)
        fail(ErrorKind::InvalidArgument, "mmla_4x4_i8 K must be a multiple of 4 (pad with zero codes)");
    Tensor out = Tensor::zeros(Layout::nchw(), ElemType::I32, {4, 4});
    active_microkernels().mmla_4x4_i8(a.data<int8_t>(), b.data<int8_t>(), size_t(a.dim(1)),
                                      out.data<int32_t>());
    return out;
}

} // namespace qconv
