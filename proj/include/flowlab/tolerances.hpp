#pragma once

// Pass thresholds for experiments and acceptance runs, kept in one place.
namespace flowlab::tol {

inline constexpr double kRoundTrip = 1e-8;
inline constexpr double kRoundTripOde = 1e-5;
inline constexpr int kRoundTripProbes = 200;

inline constexpr double kGlReconstruction = 1e-9;
inline constexpr double kSignFlipIdentity = 1e-12;

inline constexpr double kPsiSlopeLo = 0.8;
inline constexpr double kPsiSlopeHi = 1.2;
inline constexpr double kPsiIdentity = 1e-12;

inline constexpr double kGridAcfExact = 1e-10;
inline constexpr double kGridAcfFinal = 1e-2;
inline constexpr double kGridAcfSlopeMax = -0.8;

inline constexpr double kTriangularRecomposition = 1e-6;
inline constexpr int kTrailingMinorTrials = 1000;

inline constexpr double kGroupLawOde = 1e-6;
inline constexpr double kGroupLawClosedForm = 1e-12;
inline constexpr double kSplitVsOracle = 1e-6;
inline constexpr int kOracleRefinement = 10;

inline constexpr double kTv64 = 0.05;
inline constexpr double kTv1d = 0.02;
inline constexpr double kKrCdf = 2e-3;
inline constexpr double kKrLeak = 1e-6;
inline constexpr double kKs = 0.02;

inline constexpr double kLpOracle = 1e-9;

inline constexpr double kRk4OrderLo = 3.5;
inline constexpr double kRk4OrderHi = 4.5;
inline constexpr double kBackprop = 1e-4;
inline constexpr double kLogDet = 1e-4;

}  // namespace flowlab::tol
