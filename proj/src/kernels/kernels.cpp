#include "hsu/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <initializer_list>

namespace hsu::kernels {

namespace scalar {
extern const Ops table;
}
#if defined(HSU_KERNELS_AVX2)
namespace avx2 {
extern const Ops table;
bool supported();
}
#endif
#if defined(HSU_KERNELS_NEON)
namespace neon {
extern const Ops table;
}
#endif

namespace {

struct Selection {
    const Ops* ops;
    Backend backend;
};

const Ops* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &scalar::table;
#if defined(HSU_KERNELS_AVX2)
        case Backend::avx2:
            return &avx2::table;
#endif
#if defined(HSU_KERNELS_NEON)
        case Backend::neon:
            return &neon::table;
#endif
        default:
            return nullptr;
    }
}

Selection initial_selection() {
    // HSUNMIX_BACKEND={scalar,avx2,neon} overrides detection (debug aid).
    if (const char* env = std::getenv("HSUNMIX_BACKEND")) {
        for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
            if (std::strcmp(env, name(b)) == 0 && available(b)) return {table_for(b), b};
        }
    }
    const Backend b = detect_best();
    return {table_for(b), b};
}

Selection& selection() {
    static Selection s = initial_selection();
    return s;
}

}  // namespace

bool available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(HSU_KERNELS_AVX2)
            return avx2::supported();
#else
            return false;
#endif
        case Backend::neon:
#if defined(HSU_KERNELS_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend detect_best() {
    if (available(Backend::avx2)) return Backend::avx2;
    if (available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

const Ops& ops() {
    return *selection().ops;
}

Backend active() {
    return selection().backend;
}

bool set_active(Backend b) {
    if (!available(b)) return false;
    selection() = {table_for(b), b};
    return true;
}

const char* name(Backend b) {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "unknown";
}

}  // namespace hsu::kernels
