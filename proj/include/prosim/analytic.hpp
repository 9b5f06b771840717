// Closed-form control-overhead model of proactive routing and its
// sensitivity analysis: packet-failure, periodic and triggered overhead,
// partial derivatives, total differential, stationary periodic interval and
// the OLSR HELLO/TC instantiation.
//
// Every ceiling can be evaluated literally (EvalMode::Paper) or relaxed to
// its argument (EvalMode::Smooth). Smooth mode is differentiable and is the
// one validated against finite differences.
#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

namespace prosim::analytic
{

struct Params
{
    double n = 50.0;      ///< node count
    double B = 2.0e6;     ///< bandwidth, bit/s
    double k = 1.0;       ///< routing-protocol impulse factor
    double Tpr = 15.0;    ///< periodic update interval, s
    double T = 20.0;      ///< triggered-update epoch, s
    double muK = 30.0;    ///< mean link up-time, s
    double lambda = 4.0;  ///< delivered packets per second
    double pnAvg = 10.0;  ///< average number of paths
    unsigned lAvg = 3;    ///< average path length, hops
    double H = 1.0;       ///< HELLO interval (OLSR), s

    /// Throws std::invalid_argument naming the offending field.
    void Validate() const;
    /// PN_avg * lambda, the packet-failure weight.
    double C() const { return pnAvg * lambda; }
};

enum class EvalMode
{
    Paper,
    Smooth,
};

enum class TriggerForm
{
    Ratio, ///< per-route ceil(x)/x, summed over nodes
    Count, ///< ceil(x) per node
};

const char* ToString(EvalMode mode);
const char* ToString(TriggerForm form);

/// Probability term for the first r hops: 1 - exp(-r*Tpr/muK).
double LinkChangeProbability(unsigned r, double Tpr, double muK);

/// Packet-failure overhead, path-averaged: PN_avg * lambda * Tpr * sum_{r=0}^{L_avg} q_r.
double PacketFailureOverhead(const Params& p);

/// Packet-failure overhead over an explicit set of path lengths.
double PacketFailureOverhead(std::span<const unsigned> pathLengths,
                             double lambda,
                             double Tpr,
                             double muK);

/// k n^3 / (B Tpr).
double PeriodicOverhead(double k, double n, double B, double Tpr);

/// ceil(T/Tpr) / (T/Tpr) for one route.
double TriggeredOverheadSingle(double T, double Tpr, EvalMode mode = EvalMode::Paper);

double TriggeredOverheadTotal(double n,
                              double T,
                              double Tpr,
                              TriggerForm form,
                              EvalMode mode = EvalMode::Paper);

/// Aggregate overhead: packet failure + periodic + triggered.
double TotalOverhead(const Params& p,
                     TriggerForm form = TriggerForm::Count,
                     EvalMode mode = EvalMode::Paper);

/// A derivative value; `nonDifferentiable` marks a ceiling breakpoint in paper mode.
struct Derivative
{
    double value = 0.0;
    bool nonDifferentiable = false;
};

Derivative DyDTpr(const Params& p,
                  TriggerForm form = TriggerForm::Ratio,
                  EvalMode mode = EvalMode::Smooth);
double DyDLambda(const Params& p);
Derivative DyDT(const Params& p,
                TriggerForm form = TriggerForm::Ratio,
                EvalMode mode = EvalMode::Smooth);
double DyDMu(const Params& p);
/// Periodic term only.
double DyDN(const Params& p);

Derivative TotalDifferential(const Params& p,
                             double dTpr,
                             double dT,
                             TriggerForm form = TriggerForm::Ratio,
                             EvalMode mode = EvalMode::Smooth);

class BracketError : public std::runtime_error
{
  public:
    BracketError(double lo, double dLo, double hi, double dHi);
    double LoDerivative() const { return m_dLo; }
    double HiDerivative() const { return m_dHi; }

  private:
    double m_dLo;
    double m_dHi;
};

struct StationaryPoint
{
    double Tpr = 0.0;
    double derivative = 0.0; ///< dy/dTpr at the root
    double scale = 0.0;      ///< magnitude of the derivative's terms at the root
    int iterations = 0;
};

/// Bisection for dy/dTpr = 0 on [lo, hi]; throws BracketError without a sign change.
StationaryPoint SolveStationaryTpr(const Params& p,
                                   double lo,
                                   double hi,
                                   TriggerForm form = TriggerForm::Count,
                                   EvalMode mode = EvalMode::Smooth);

/// Two sides of the stationarity balance: failure-rate side vs periodic/trigger side.
struct Balance
{
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Balance at p.Tpr.
Balance StationaritySides(const Params& p,
                          TriggerForm form = TriggerForm::Count,
                          EvalMode mode = EvalMode::Smooth);

/// Balance with Tpr replaced by muK * h (h = update coefficient).
Balance UpdateCoefficientSides(const Params& p,
                               double h,
                               TriggerForm form = TriggerForm::Count,
                               EvalMode mode = EvalMode::Smooth);

/// OLSR overhead with HELLO interval H and TC interval 2H.
double OlsrOverhead(const Params& p, double H, EvalMode mode = EvalMode::Paper);
Derivative DOlsrDH(const Params& p, double H, EvalMode mode = EvalMode::Smooth);

enum class Param
{
    N,
    B,
    K,
    Tpr,
    T,
    MuK,
    Lambda,
    PnAvg,
    H,
};

const char* ToString(Param param);
double Get(const Params& p, Param which);
void Set(Params& p, Param which, double value);

struct FiniteDiff
{
    double value = 0.0;
    bool reliable = true; ///< false when the stencil straddles a ceiling breakpoint
};

/// Central difference (f(x+h) - f(x-h)) / 2h of a scalar function.
double CentralDifference(const std::function<double(double)>& f, double x, double step);

/**
 * Central difference of `f` in one parameter. In paper mode the result is
 * flagged unreliable when a ceiling argument (T/Tpr or T/3H) crosses or
 * touches an integer inside the stencil.
 */
FiniteDiff FiniteDifference(const std::function<double(const Params&)>& f,
                            Param which,
                            const Params& p,
                            double step,
                            EvalMode mode = EvalMode::Smooth);

/// Parses flat `key = value` lines with keys n, B, k, T_pr, T, mu_k, lambda,
/// PN_avg, L_avg, H; unspecified keys keep their defaults.
Params ParseParams(std::istream& in);

} // namespace prosim::analytic
