#include "orbita/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace orbita::kernels {

namespace {

struct Table {
  Backend backend;
  double (*dot_rr)(std::span<const double>, std::span<const double>);
  cplx (*dot_rc)(std::span<const double>, std::span<const cplx>);
  cplx (*cdot)(std::span<const cplx>, std::span<const cplx>);
  double (*weighted_norm2)(std::span<const double>, std::span<const cplx>);
  void (*cmul_inplace)(std::span<cplx>, std::span<const cplx>);
  void (*caxpy)(cplx, std::span<const cplx>, std::span<cplx>);
};

bool cpu_has_avx2() noexcept {
#if defined(ORBITA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Table select_table() {
  Table t{Backend::scalar,
          &scalar::dot,
          &scalar::dot,
          &scalar::cdot,
          &scalar::weighted_norm2,
          &scalar::cmul_inplace,
          &scalar::caxpy};
  const char* forced = std::getenv("ORBITA_SIMD");
  const bool want_scalar = forced != nullptr && std::strcmp(forced, "scalar") == 0;
#if defined(ORBITA_HAVE_AVX2)
  if (!want_scalar && cpu_has_avx2()) {
    t = Table{Backend::avx2,         &avx2::dot,          &avx2::dot,  &avx2::cdot,
              &avx2::weighted_norm2, &avx2::cmul_inplace, &avx2::caxpy};
  }
#else
  (void)want_scalar;
#endif
  return t;
}

const Table& table() {
  static const Table t = select_table();
  return t;
}

}  // namespace

std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

bool avx2_available() noexcept {
  static const bool ok = cpu_has_avx2();
  return ok;
}

Backend active_backend() noexcept { return table().backend; }

double dot(std::span<const double> a, std::span<const double> b) { return table().dot_rr(a, b); }
cplx dot(std::span<const double> w, std::span<const cplx> z) { return table().dot_rc(w, z); }
cplx cdot(std::span<const cplx> a, std::span<const cplx> b) { return table().cdot(a, b); }
double weighted_norm2(std::span<const double> w, std::span<const cplx> z) {
  return table().weighted_norm2(w, z);
}
void cmul_inplace(std::span<cplx> z, std::span<const cplx> r) { table().cmul_inplace(z, r); }
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { table().caxpy(a, x, y); }

}  // namespace orbita::kernels
