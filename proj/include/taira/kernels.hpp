#pragma once

#include <span>
#include <string_view>

// Dense similarity kernels behind the embedding retriever. The scalar versions
// are the reference; vector variants must agree with them to float rounding.
namespace taira::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Best variant available on this CPU, detected once.
Isa active_isa();
bool isa_available(Isa isa);

namespace scalar {
double dot(std::span<const float> a, std::span<const float> b);
}

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
double dot(std::span<const float> a, std::span<const float> b);
}
#endif

#if defined(__aarch64__)
namespace neon {
double dot(std::span<const float> a, std::span<const float> b);
}
#endif

// Dispatches to active_isa(). Spans must have equal length.
double dot(std::span<const float> a, std::span<const float> b);
double dot(Isa isa, std::span<const float> a, std::span<const float> b);

double norm(std::span<const float> a);

// 0 when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace taira::kernels
