#include "prosim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <vector>

namespace prosim::analytic
{

namespace
{

double
Ceil(double x, EvalMode mode)
{
    return mode == EvalMode::Paper ? std::ceil(x) : x;
}

bool
IsIntegral(double x)
{
    return std::abs(x - std::round(x)) <= 1e-12 * std::max(1.0, std::abs(x));
}

void
RequirePositive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
    {
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
}

/// sum_{r=0}^{L} (1 - e^{-r x}) with x = Tpr/muK.
double
SumQ(unsigned lAvg, double Tpr, double muK)
{
    double s = 0.0;
    for (unsigned r = 0; r <= lAvg; ++r)
    {
        s += LinkChangeProbability(r, Tpr, muK);
    }
    return s;
}

/// sum_{r=0}^{L} (1 - e^{-a} + a e^{-a}) with a = r Tpr / muK.
double
SumDq(unsigned lAvg, double Tpr, double muK)
{
    double s = 0.0;
    for (unsigned r = 0; r <= lAvg; ++r)
    {
        const double a = r * Tpr / muK;
        const double e = std::exp(-a);
        s += (1.0 - e) + a * e;
    }
    return s;
}

/// Printed trigger term of the Tpr derivative: n (ceil(-T/Tpr^2) + T/Tpr^2) / (T^2/Tpr^2).
double
PaperTriggerDTpr(double n, double T, double Tpr)
{
    const double u = T / (Tpr * Tpr);
    return n * (std::ceil(-u) + u) / (T * T / (Tpr * Tpr));
}

/// Printed T derivative: (n+1) (ceil(1/Tpr^2) - 1/Tpr^2) / (T^2/Tpr^2).
double
PaperTriggerDT(double n, double T, double Tpr)
{
    const double v = 1.0 / (Tpr * Tpr);
    return (n + 1.0) * (std::ceil(v) - v) / (T * T / (Tpr * Tpr));
}

} // namespace

void
Params::Validate() const
{
    if (!(n >= 1.0) || !IsIntegral(n))
    {
        throw std::invalid_argument("n must be an integer >= 1");
    }
    RequirePositive(B, "B");
    RequirePositive(k, "k");
    RequirePositive(Tpr, "T_pr");
    RequirePositive(T, "T");
    RequirePositive(muK, "mu_k");
    RequirePositive(lambda, "lambda");
    RequirePositive(pnAvg, "PN_avg");
    RequirePositive(H, "H");
}

const char*
ToString(EvalMode mode)
{
    return mode == EvalMode::Paper ? "paper" : "smooth";
}

const char*
ToString(TriggerForm form)
{
    return form == TriggerForm::Ratio ? "ratio" : "count";
}

double
LinkChangeProbability(unsigned r, double Tpr, double muK)
{
    RequirePositive(Tpr, "T_pr");
    RequirePositive(muK, "mu_k");
    return -std::expm1(-static_cast<double>(r) * Tpr / muK);
}

double
PacketFailureOverhead(const Params& p)
{
    return p.C() * p.Tpr * SumQ(p.lAvg, p.Tpr, p.muK);
}

double
PacketFailureOverhead(std::span<const unsigned> pathLengths, double lambda, double Tpr, double muK)
{
    double s = 0.0;
    for (unsigned len : pathLengths)
    {
        s += SumQ(len, Tpr, muK);
    }
    return s * lambda * Tpr;
}

double
PeriodicOverhead(double k, double n, double B, double Tpr)
{
    RequirePositive(B, "B");
    RequirePositive(Tpr, "T_pr");
    return k * n * n * n / (B * Tpr);
}

double
TriggeredOverheadSingle(double T, double Tpr, EvalMode mode)
{
    RequirePositive(T, "T");
    RequirePositive(Tpr, "T_pr");
    const double x = T / Tpr;
    return Ceil(x, mode) / x;
}

double
TriggeredOverheadTotal(double n, double T, double Tpr, TriggerForm form, EvalMode mode)
{
    if (form == TriggerForm::Ratio)
    {
        return n * TriggeredOverheadSingle(T, Tpr, mode);
    }
    RequirePositive(T, "T");
    RequirePositive(Tpr, "T_pr");
    return n * Ceil(T / Tpr, mode);
}

double
TotalOverhead(const Params& p, TriggerForm form, EvalMode mode)
{
    return PacketFailureOverhead(p) + PeriodicOverhead(p.k, p.n, p.B, p.Tpr) +
           TriggeredOverheadTotal(p.n, p.T, p.Tpr, form, mode);
}

Derivative
DyDTpr(const Params& p, TriggerForm form, EvalMode mode)
{
    Derivative d;
    d.value = p.C() * SumDq(p.lAvg, p.Tpr, p.muK) - p.k * p.n * p.n * p.n / (p.B * p.Tpr * p.Tpr);
    if (mode == EvalMode::Paper)
    {
        d.value += PaperTriggerDTpr(p.n, p.T, p.Tpr);
        d.nonDifferentiable = IsIntegral(p.T / p.Tpr);
    }
    else if (form == TriggerForm::Count)
    {
        d.value -= p.n * p.T / (p.Tpr * p.Tpr);
    }
    return d;
}

double
DyDLambda(const Params& p)
{
    return p.pnAvg * p.Tpr * SumQ(p.lAvg, p.Tpr, p.muK);
}

Derivative
DyDT(const Params& p, TriggerForm form, EvalMode mode)
{
    Derivative d;
    if (mode == EvalMode::Paper)
    {
        d.value = PaperTriggerDT(p.n, p.T, p.Tpr);
        d.nonDifferentiable = IsIntegral(p.T / p.Tpr);
    }
    else if (form == TriggerForm::Count)
    {
        d.value = p.n / p.Tpr;
    }
    return d;
}

double
DyDMu(const Params& p)
{
    double s = 0.0;
    for (unsigned r = 0; r <= p.lAvg; ++r)
    {
        const double a = r * p.Tpr / p.muK;
        s -= r * p.Tpr / (p.muK * p.muK) * std::exp(-a);
    }
    return p.C() * p.Tpr * s;
}

double
DyDN(const Params& p)
{
    return 3.0 * p.k * p.n * p.n / (p.B * p.Tpr);
}

Derivative
TotalDifferential(const Params& p, double dTpr, double dT, TriggerForm form, EvalMode mode)
{
    const Derivative a = DyDTpr(p, form, mode);
    const Derivative b = DyDT(p, form, mode);
    return {a.value * dTpr + b.value * dT, a.nonDifferentiable || b.nonDifferentiable};
}

namespace
{

std::string
BracketMessage(double lo, double dLo, double hi, double dHi)
{
    std::ostringstream os;
    os.precision(17);
    os << "dy/dT_pr does not change sign on [" << lo << ", " << hi << "]: " << dLo << " at " << lo
       << ", " << dHi << " at " << hi;
    return os.str();
}

} // namespace

BracketError::BracketError(double lo, double dLo, double hi, double dHi)
    : std::runtime_error(BracketMessage(lo, dLo, hi, dHi)),
      m_dLo(dLo),
      m_dHi(dHi)
{
}

Balance
StationaritySides(const Params& p, TriggerForm form, EvalMode mode)
{
    Balance b;
    b.lhs = p.C() * SumDq(p.lAvg, p.Tpr, p.muK);
    b.rhs = p.k * p.n * p.n * p.n / (p.B * p.Tpr * p.Tpr);
    if (mode == EvalMode::Paper)
    {
        b.rhs -= PaperTriggerDTpr(p.n, p.T, p.Tpr);
    }
    else if (form == TriggerForm::Count)
    {
        b.rhs += p.n * p.T / (p.Tpr * p.Tpr);
    }
    return b;
}

Balance
UpdateCoefficientSides(const Params& p, double h, TriggerForm form, EvalMode mode)
{
    RequirePositive(h, "h");
    Params q = p;
    q.Tpr = p.muK * h;
    return StationaritySides(q, form, mode);
}

StationaryPoint
SolveStationaryTpr(const Params& p, double lo, double hi, TriggerForm form, EvalMode mode)
{
    RequirePositive(lo, "bracket low end");
    if (!(hi > lo))
    {
        throw std::invalid_argument("bracket must satisfy lo < hi");
    }
    const auto deriv = [&](double t) {
        Params q = p;
        q.Tpr = t;
        return DyDTpr(q, form, mode).value;
    };
    const auto scaleAt = [&](double t) {
        Params q = p;
        q.Tpr = t;
        const Balance b = StationaritySides(q, form, mode);
        return std::max(std::abs(b.lhs), std::abs(b.rhs));
    };
    double a = lo;
    double b = hi;
    double fa = deriv(a);
    const double fb = deriv(b);
    if (fa == 0.0)
    {
        return {a, 0.0, scaleAt(a), 0};
    }
    if (fb == 0.0)
    {
        return {b, 0.0, scaleAt(b), 0};
    }
    if ((fa < 0.0) == (fb < 0.0))
    {
        throw BracketError(lo, fa, hi, fb);
    }
    StationaryPoint out;
    for (int it = 1; it <= 400; ++it)
    {
        const double m = 0.5 * (a + b);
        const double fm = deriv(m);
        out = {m, fm, scaleAt(m), it};
        if (std::abs(fm) <= 1e-12 * out.scale || m == a || m == b)
        {
            break;
        }
        if ((fm < 0.0) == (fa < 0.0))
        {
            a = m;
            fa = fm;
        }
        else
        {
            b = m;
        }
    }
    return out;
}

double
OlsrOverhead(const Params& p, double H, EvalMode mode)
{
    RequirePositive(H, "H");
    Params q = p;
    q.Tpr = H;
    const double kn3 = p.k * p.n * p.n * p.n;
    const double x = p.T / (H + 2.0 * H);
    return PacketFailureOverhead(q) + kn3 / (p.B * H) + kn3 / (p.B * 2.0 * H) +
           p.n * Ceil(x, mode) / x;
}

Derivative
DOlsrDH(const Params& p, double H, EvalMode mode)
{
    RequirePositive(H, "H");
    const double kn3 = p.k * p.n * p.n * p.n;
    Derivative d;
    d.value = -kn3 / (p.B * H * H) - kn3 / (p.B * 2.0 * H * H);
    if (mode == EvalMode::Paper)
    {
        const double h3 = H + 2.0 * H;
        d.value += p.n * (std::ceil(-p.T / (H + 2.0 * H * H)) + p.T / (h3 * h3)) /
                   (p.T * p.T / (h3 * h3));
        d.nonDifferentiable = IsIntegral(p.T / h3);
    }
    else
    {
        d.value += p.C() * SumDq(p.lAvg, H, p.muK);
    }
    return d;
}

const char*
ToString(Param param)
{
    switch (param)
    {
    case Param::N:
        return "n";
    case Param::B:
        return "B";
    case Param::K:
        return "k";
    case Param::Tpr:
        return "T_pr";
    case Param::T:
        return "T";
    case Param::MuK:
        return "mu_k";
    case Param::Lambda:
        return "lambda";
    case Param::PnAvg:
        return "PN_avg";
    case Param::H:
        return "H";
    }
    return "?";
}

double
Get(const Params& p, Param which)
{
    switch (which)
    {
    case Param::N:
        return p.n;
    case Param::B:
        return p.B;
    case Param::K:
        return p.k;
    case Param::Tpr:
        return p.Tpr;
    case Param::T:
        return p.T;
    case Param::MuK:
        return p.muK;
    case Param::Lambda:
        return p.lambda;
    case Param::PnAvg:
        return p.pnAvg;
    case Param::H:
        return p.H;
    }
    return 0.0;
}

void
Set(Params& p, Param which, double value)
{
    switch (which)
    {
    case Param::N:
        p.n = value;
        break;
    case Param::B:
        p.B = value;
        break;
    case Param::K:
        p.k = value;
        break;
    case Param::Tpr:
        p.Tpr = value;
        break;
    case Param::T:
        p.T = value;
        break;
    case Param::MuK:
        p.muK = value;
        break;
    case Param::Lambda:
        p.lambda = value;
        break;
    case Param::PnAvg:
        p.pnAvg = value;
        break;
    case Param::H:
        p.H = value;
        break;
    }
}

double
CentralDifference(const std::function<double(double)>& f, double x, double step)
{
    RequirePositive(step, "step");
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

namespace
{

/// Arguments of every ceiling the paper-mode expressions evaluate.
std::vector<double>
CeilingArguments(const Params& p)
{
    const double h3 = 3.0 * p.H;
    return {p.T / p.Tpr,
            p.T / (p.Tpr * p.Tpr),
            1.0 / (p.Tpr * p.Tpr),
            p.T / h3,
            p.T / (p.H + 2.0 * p.H * p.H)};
}

} // namespace

FiniteDiff
FiniteDifference(const std::function<double(const Params&)>& f,
                 Param which,
                 const Params& p,
                 double step,
                 EvalMode mode)
{
    RequirePositive(step, "step");
    Params lo = p;
    Params hi = p;
    const double x = Get(p, which);
    Set(lo, which, x - step);
    Set(hi, which, x + step);
    FiniteDiff out;
    out.value = (f(hi) - f(lo)) / (2.0 * step);
    if (mode == EvalMode::Paper)
    {
        const auto a = CeilingArguments(lo);
        const auto c = CeilingArguments(p);
        const auto b = CeilingArguments(hi);
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            if (a[i] == b[i])
            {
                continue; // this ceiling does not move with the stepped parameter
            }
            if (std::ceil(a[i]) != std::ceil(b[i]) || IsIntegral(a[i]) || IsIntegral(c[i]) ||
                IsIntegral(b[i]))
            {
                out.reliable = false;
            }
        }
    }
    return out;
}

Params
ParseParams(std::istream& in)
{
    Params p;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            throw std::invalid_argument("line " + std::to_string(lineNo) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string text = trim(line.substr(eq + 1));
        auto fail = [&] {
            return std::invalid_argument("line " + std::to_string(lineNo) + ": bad value for '" +
                                         key + "': '" + text + "'");
        };
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(text, &used);
        }
        catch (const std::exception&)
        {
            throw fail();
        }
        if (used != text.size())
        {
            throw fail();
        }
        if (key == "L_avg")
        {
            if (v < 0.0 || !IsIntegral(v))
            {
                throw fail();
            }
            p.lAvg = static_cast<unsigned>(std::llround(v));
            continue;
        }
        static const std::pair<const char*, Param> keys[] = {
            {"n", Param::N},
            {"B", Param::B},
            {"k", Param::K},
            {"T_pr", Param::Tpr},
            {"T", Param::T},
            {"mu_k", Param::MuK},
            {"lambda", Param::Lambda},
            {"PN_avg", Param::PnAvg},
            {"H", Param::H},
        };
        const auto it = std::find_if(std::begin(keys), std::end(keys), [&](const auto& kv) {
            return key == kv.first;
        });
        if (it == std::end(keys))
        {
            throw std::invalid_argument("line " + std::to_string(lineNo) + ": unknown key '" + key + "'");
        }
        Set(p, it->second, v);
    }
    try
    {
        p.Validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw std::invalid_argument(std::string("analytic parameters: ") + e.what());
    }
    return p;
}

} // namespace prosim::analytic
