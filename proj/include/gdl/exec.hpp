#pragma once

namespace gdl {

/// Selects between the serial reference kernels and the OpenMP kernels.
///
/// Both are deterministic. The parallel kernels use owner-computes loops with a
/// fixed-order final reduction, so their output does not depend on the thread
/// count. They may differ from the serial kernels in the last few ulps.
enum class Exec { serial, parallel };

}  // namespace gdl
