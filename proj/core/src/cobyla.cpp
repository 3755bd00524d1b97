// Trust-region optimizer with linear interpolation models (Powell's COBYLA).
// The two routines below keep the original 1-based indexing and control flow
// of the published algorithm; translating the numbered jumps into structured
// loops has historically been a rich source of subtle defects, so they are
// preserved and the modern interface lives in the wrapper at the bottom.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbnc/optim.hpp"

namespace qbnc {

namespace {

// Dense 1-based matrix; row/column 0 are unused padding.
class Mat1 {
 public:
  Mat1(int rows, int cols)
      : cols_(cols), d_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {}
  double& operator()(int i, int j) {
    return d_[static_cast<std::size_t>(i) * (cols_ + 1) + j];
  }
  double operator()(int i, int j) const {
    return d_[static_cast<std::size_t>(i) * (cols_ + 1) + j];
  }

 private:
  int cols_;
  std::vector<double> d_;
};

using Vec1 = std::vector<double>;  // index 0 unused
using IVec1 = std::vector<int>;

// Evaluates f and the constraint values at x (both 1-based).
using CalcFc = std::function<void(const Vec1& x, double& f, Vec1& con)>;

// Two-stage linear program: first find dx of length <= rho minimizing the
// greatest violation of a(:,k)^T dx >= b(k), k = 1..m; any remaining freedom
// then minimizes -a(:,m+1)^T dx without increasing the worst violation.
// ifull = 0 reports that |dx| < rho due to degeneracy.
void trstlp(int n, int m, const Mat1& a, const Vec1& b, double rho, Vec1& dx,
            int& ifull, IVec1& iact) {
  Mat1 z(n, n);
  Vec1 zdota(n + 1, 0.0), vmultc(m + 2, 0.0), sdirn(n + 1, 0.0),
      dxnew(n + 1, 0.0), vmultd(m + 2, 0.0);

  int mcon, nact, icon, i, j, k, nactx, isave, kk, kw, kp, kl, icount;
  double resmax, optold, optnew, tot, temp, alpha, beta, sp, spabs, acca, accb,
      ratio, zdotv, zdvabs, vsave, dd, ss, sd, stpful, step, zdotw, zdwabs,
      resold, sumabs, sum, tempa;

  ifull = 1;
  mcon = m;
  nact = 0;
  nactx = 0;
  resmax = 0.0;
  resold = 0.0;
  icon = 0;
  for (i = 1; i <= n; ++i) {
    for (j = 1; j <= n; ++j) z(i, j) = 0.0;
    z(i, i) = 1.0;
    dx[i] = 0.0;
  }
  if (m >= 1) {
    for (k = 1; k <= m; ++k)
      if (b[k] > resmax) {
        resmax = b[k];
        icon = k;
      }
    for (k = 1; k <= m; ++k) {
      iact[k] = k;
      vmultc[k] = resmax - b[k];
    }
  }
  if (resmax == 0.0) goto L480;
  for (i = 1; i <= n; ++i) sdirn[i] = 0.0;

  // A stage ends when 3 consecutive iterations neither reduce the best
  // objective value nor grow the active set; this prevents cycling.
L60:
  optold = 0.0;
  icount = 0;
L70:
  if (mcon == m) {
    optnew = resmax;
  } else {
    optnew = 0.0;
    for (i = 1; i <= n; ++i) optnew -= dx[i] * a(i, mcon);
  }
  if (icount == 0 || optnew < optold) {
    optold = optnew;
    nactx = nact;
    icount = 3;
  } else if (nact > nactx) {
    nactx = nact;
    icount = 3;
  } else {
    --icount;
    if (icount == 0) goto L490;
  }

  // icon > nact: admit constraint iact(icon) to the active set. Givens
  // rotations make the trailing columns of Z orthogonal to its gradient;
  // scalar products that could be pure rounding noise are zeroed.
  if (icon <= nact) goto L260;
  kk = iact[icon];
  for (i = 1; i <= n; ++i) dxnew[i] = a(i, kk);
  tot = 0.0;
  k = n;
L100:
  if (k > nact) {
    sp = 0.0;
    spabs = 0.0;
    for (i = 1; i <= n; ++i) {
      temp = z(i, k) * dxnew[i];
      sp += temp;
      spabs += std::abs(temp);
    }
    acca = spabs + 0.1 * std::abs(sp);
    accb = spabs + 0.2 * std::abs(sp);
    if (spabs >= acca || acca >= accb) sp = 0.0;
    if (tot == 0.0) {
      tot = sp;
    } else {
      kp = k + 1;
      temp = std::sqrt(sp * sp + tot * tot);
      alpha = sp / temp;
      beta = tot / temp;
      tot = temp;
      for (i = 1; i <= n; ++i) {
        temp = alpha * z(i, k) + beta * z(i, kp);
        z(i, kp) = alpha * z(i, kp) - beta * z(i, k);
        z(i, k) = temp;
      }
    }
    --k;
    goto L100;
  }

  if (tot != 0.0) {
    ++nact;
    zdota[nact] = tot;
    vmultc[icon] = vmultc[nact];
    vmultc[nact] = 0.0;
    goto L210;
  }

  // The new gradient is dependent on the active set: find multipliers of the
  // combination, pick a constraint to displace, or give up on this stage.
  ratio = -1.0;
  k = nact;
L130:
  zdotv = 0.0;
  zdvabs = 0.0;
  for (i = 1; i <= n; ++i) {
    temp = z(i, k) * dxnew[i];
    zdotv += temp;
    zdvabs += std::abs(temp);
  }
  acca = zdvabs + 0.1 * std::abs(zdotv);
  accb = zdvabs + 0.2 * std::abs(zdotv);
  if (zdvabs < acca && acca < accb) {
    temp = zdotv / zdota[k];
    if (temp > 0.0 && iact[k] <= m) {
      tempa = vmultc[k] / temp;
      if (ratio < 0.0 || tempa < ratio) ratio = tempa;
    }
    if (k >= 2) {
      kw = iact[k];
      for (i = 1; i <= n; ++i) dxnew[i] -= temp * a(i, kw);
    }
    vmultd[k] = temp;
  } else {
    vmultd[k] = 0.0;
  }
  --k;
  if (k > 0) goto L130;
  if (ratio < 0.0) goto L490;

  for (k = 1; k <= nact; ++k)
    vmultc[k] = std::max(0.0, vmultc[k] - ratio * vmultd[k]);
  if (icon < nact) {
    isave = iact[icon];
    vsave = vmultc[icon];
    k = icon;
  L170:
    kp = k + 1;
    kw = iact[kp];
    sp = 0.0;
    for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kw);
    temp = std::sqrt(sp * sp + zdota[kp] * zdota[kp]);
    alpha = zdota[kp] / temp;
    beta = sp / temp;
    zdota[kp] = alpha * zdota[k];
    zdota[k] = temp;
    for (i = 1; i <= n; ++i) {
      temp = alpha * z(i, kp) + beta * z(i, k);
      z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
      z(i, k) = temp;
    }
    iact[k] = kw;
    vmultc[k] = vmultc[kp];
    k = kp;
    if (k < nact) goto L170;
    iact[k] = isave;
    vmultc[k] = vsave;
  }
  temp = 0.0;
  for (i = 1; i <= n; ++i) temp += z(i, nact) * a(i, kk);
  if (temp == 0.0) goto L490;
  zdota[nact] = temp;
  vmultc[icon] = 0.0;
  vmultc[nact] = ratio;

  // Keep the objective treated as the final active constraint in stage two.
L210:
  iact[icon] = iact[nact];
  iact[nact] = kk;
  if (mcon > m && kk != mcon) {
    k = nact - 1;
    sp = 0.0;
    for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
    temp = std::sqrt(sp * sp + zdota[nact] * zdota[nact]);
    alpha = zdota[nact] / temp;
    beta = sp / temp;
    zdota[nact] = alpha * zdota[k];
    zdota[k] = temp;
    for (i = 1; i <= n; ++i) {
      temp = alpha * z(i, nact) + beta * z(i, k);
      z(i, nact) = alpha * z(i, k) - beta * z(i, nact);
      z(i, k) = temp;
    }
    iact[nact] = iact[k];
    iact[k] = kk;
    temp = vmultc[k];
    vmultc[k] = vmultc[nact];
    vmultc[nact] = temp;
  }

  if (mcon > m) goto L320;
  kk = iact[nact];
  temp = 0.0;
  for (i = 1; i <= n; ++i) temp += sdirn[i] * a(i, kk);
  temp -= 1.0;
  temp /= zdota[nact];
  for (i = 1; i <= n; ++i) sdirn[i] -= temp * z(i, nact);
  goto L340;

  // Remove constraint iact(icon) from the active set.
L260:
  if (icon < nact) {
    isave = iact[icon];
    vsave = vmultc[icon];
    k = icon;
  L270:
    kp = k + 1;
    kk = iact[kp];
    sp = 0.0;
    for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
    temp = std::sqrt(sp * sp + zdota[kp] * zdota[kp]);
    alpha = zdota[kp] / temp;
    beta = sp / temp;
    zdota[kp] = alpha * zdota[k];
    zdota[k] = temp;
    for (i = 1; i <= n; ++i) {
      temp = alpha * z(i, kp) + beta * z(i, k);
      z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
      z(i, k) = temp;
    }
    iact[k] = kk;
    vmultc[k] = vmultc[kp];
    k = kp;
    if (k < nact) goto L270;
    iact[k] = isave;
    vmultc[k] = vsave;
  }
  --nact;

  if (mcon > m) goto L320;
  temp = 0.0;
  for (i = 1; i <= n; ++i) temp += sdirn[i] * z(i, nact + 1);
  for (i = 1; i <= n; ++i) sdirn[i] -= temp * z(i, nact + 1);
  goto L340;

L320:
  temp = 1.0 / zdota[nact];
  for (i = 1; i <= n; ++i) sdirn[i] = temp * z(i, nact);

  // Step to the trust-region boundary, or far enough to zero the worst
  // residual in stage one. The 1e-6 guards absorb harmless underflow.
L340:
  dd = rho * rho;
  sd = 0.0;
  ss = 0.0;
  for (i = 1; i <= n; ++i) {
    if (std::abs(dx[i]) >= 1e-6 * rho) dd -= dx[i] * dx[i];
    sd += dx[i] * sdirn[i];
    ss += sdirn[i] * sdirn[i];
  }
  if (dd <= 0.0) goto L490;
  temp = std::sqrt(ss * dd);
  if (std::abs(sd) >= 1e-6 * temp) temp = std::sqrt(ss * dd + sd * sd);
  stpful = dd / (temp + sd);
  step = stpful;
  if (mcon == m) {
    acca = step + 0.1 * resmax;
    accb = step + 0.2 * resmax;
    if (step >= acca || acca >= accb) goto L480;
    step = std::min(step, resmax);
  }

  for (i = 1; i <= n; ++i) dxnew[i] = dx[i] + step * sdirn[i];
  if (mcon == m) {
    resold = resmax;
    resmax = 0.0;
    for (k = 1; k <= nact; ++k) {
      kk = iact[k];
      temp = b[kk];
      for (i = 1; i <= n; ++i) temp -= a(i, kk) * dxnew[i];
      resmax = std::max(resmax, temp);
    }
  }

  // Lagrange multipliers that dx = dxnew would produce; values explainable
  // by rounding are forced to zero.
  k = nact;
L390:
  zdotw = 0.0;
  zdwabs = 0.0;
  for (i = 1; i <= n; ++i) {
    temp = z(i, k) * dxnew[i];
    zdotw += temp;
    zdwabs += std::abs(temp);
  }
  acca = zdwabs + 0.1 * std::abs(zdotw);
  accb = zdwabs + 0.2 * std::abs(zdotw);
  if (zdwabs >= acca || acca >= accb) zdotw = 0.0;
  vmultd[k] = zdotw / zdota[k];
  if (k >= 2) {
    kk = iact[k];
    for (i = 1; i <= n; ++i) dxnew[i] -= vmultd[k] * a(i, kk);
    --k;
    goto L390;
  }
  if (mcon > m) vmultd[nact] = std::max(0.0, vmultd[nact]);

  for (i = 1; i <= n; ++i) dxnew[i] = dx[i] + step * sdirn[i];
  if (mcon > nact) {
    kl = nact + 1;
    for (k = kl; k <= mcon; ++k) {
      kk = iact[k];
      sum = resmax - b[kk];
      sumabs = resmax + std::abs(b[kk]);
      for (i = 1; i <= n; ++i) {
        temp = a(i, kk) * dxnew[i];
        sum += temp;
        sumabs += std::abs(temp);
      }
      acca = sumabs + 0.1 * std::abs(sum);
      accb = sumabs + 0.2 * std::abs(sum);
      if (sumabs >= acca || acca >= accb) sum = 0.0;
      vmultd[k] = sum;
    }
  }

  ratio = 1.0;
  icon = 0;
  for (k = 1; k <= mcon; ++k) {
    if (vmultd[k] < 0.0) {
      temp = vmultc[k] / (vmultc[k] - vmultd[k]);
      if (temp < ratio) {
        ratio = temp;
        icon = k;
      }
    }
  }

  temp = 1.0 - ratio;
  for (i = 1; i <= n; ++i) dx[i] = temp * dx[i] + ratio * dxnew[i];
  for (k = 1; k <= mcon; ++k)
    vmultc[k] = std::max(0.0, temp * vmultc[k] + ratio * vmultd[k]);
  if (mcon == m) resmax = resold + ratio * (resmax - resold);

  if (icon > 0) goto L70;
  if (step == stpful) goto L500;
L480:
  mcon = m + 1;
  icon = mcon;
  iact[mcon] = mcon;
  vmultc[mcon] = 0.0;
  goto L60;

L490:
  if (mcon == m) goto L480;
  ifull = 0;
L500:
  return;
}

struct CobylbOutcome {
  bool hit_maxfun = false;
};

// Main loop: keeps an n+1 vertex simplex, interpolates linear models for f
// and the constraints, asks trstlp for a trust-region step, and accepts or
// repairs vertices by Powell's sigma/eta geometry tests. The merit function
// is f + parmu * maxviolation with parmu raised only when a predicted merit
// reduction would otherwise be negative.
CobylbOutcome cobylb(int n, int m, Vec1& x, double rhobeg, double rhoend,
                     int maxfun, const CalcFc& calcfc) {
  const int np = n + 1, mp = m + 1, mpp = m + 2;
  const double alpha = 0.25, beta = 2.1, gamma = 0.5, delta = 1.1;

  Mat1 sim(n, np), simi(n, n), datmat(mpp, np), a(n, mp);
  Vec1 con(mpp + 1, 0.0), vsig(n + 1, 0.0), veta(n + 1, 0.0),
      sigbar(n + 1, 0.0), dx(n + 1, 0.0), w(n + 1, 0.0);
  IVec1 iact(m + 2, 0);

  CobylbOutcome outcome;
  int i, j, k, l, nbest, iflag = 0, ifull = 0, nfvals, jdrop, ibrnch;
  double rho = rhobeg, parmu = 0.0, resmax, phimin, tempa, error, parsig = 0.0,
         pareta = 0.0, wsig, weta, cvmaxp, cvmaxm, sum, dxsign, resnew, barmu,
         phi, prerec = 0.0, prerem = 0.0, vmold, vmnew, trured, ratio, edgmax,
         denom, cmin = 0.0, cmax = 0.0, f = 0.0, temp;

  nfvals = 0;
  temp = 1.0 / rho;
  for (i = 1; i <= n; ++i) {
    sim(i, np) = x[i];
    for (j = 1; j <= n; ++j) simi(i, j) = 0.0;
    sim(i, i) = rho;
    simi(i, i) = temp;
  }
  jdrop = np;
  ibrnch = 0;

L40:
  if (nfvals >= maxfun && nfvals > 0) {
    outcome.hit_maxfun = true;
    goto L600;
  }
  ++nfvals;
  calcfc(x, f, con);
  resmax = 0.0;
  if (m > 0)
    for (k = 1; k <= m; ++k) resmax = std::max(resmax, -con[k]);
  con[mp] = f;
  con[mpp] = resmax;
  if (ibrnch == 1) goto L440;

  // Column jdrop of datmat holds (constraints..., f, maxviolation) at the
  // matching simplex vertex.
  for (k = 1; k <= mpp; ++k) datmat(k, jdrop) = con[k];
  if (nfvals > np) goto L130;

  // Building the initial simplex: swap a better new vertex into pole
  // position, then step along the next coordinate.
  if (jdrop <= n) {
    if (datmat(mp, np) <= f) {
      x[jdrop] = sim(jdrop, np);
    } else {
      sim(jdrop, np) = x[jdrop];
      for (k = 1; k <= mpp; ++k) {
        datmat(k, jdrop) = datmat(k, np);
        datmat(k, np) = con[k];
      }
      for (k = 1; k <= jdrop; ++k) {
        sim(jdrop, k) = -rho;
        temp = 0.0;
        for (i = k; i <= jdrop; ++i) temp -= simi(i, k);
        simi(jdrop, k) = temp;
      }
    }
  }
  if (nfvals <= n) {
    jdrop = nfvals;
    x[jdrop] += rho;
    goto L40;
  }
L130:
  ibrnch = 1;

L140:
  phimin = datmat(mp, np) + parmu * datmat(mpp, np);
  nbest = np;
  for (j = 1; j <= n; ++j) {
    temp = datmat(mp, j) + parmu * datmat(mpp, j);
    if (temp < phimin) {
      nbest = j;
      phimin = temp;
    } else if (temp == phimin && parmu == 0.0) {
      if (datmat(mpp, j) < datmat(mpp, nbest)) nbest = j;
    }
  }

  if (nbest <= n) {
    for (i = 1; i <= mpp; ++i) {
      temp = datmat(i, np);
      datmat(i, np) = datmat(i, nbest);
      datmat(i, nbest) = temp;
    }
    for (i = 1; i <= n; ++i) {
      temp = sim(i, nbest);
      sim(i, nbest) = 0.0;
      sim(i, np) += temp;
      tempa = 0.0;
      for (k = 1; k <= n; ++k) {
        sim(i, k) -= temp;
        tempa -= simi(k, i);
      }
      simi(nbest, i) = tempa;
    }
  }

  // Abort if simi has drifted away from being the inverse of sim.
  error = 0.0;
  for (i = 1; i <= n; ++i)
    for (j = 1; j <= n; ++j) {
      temp = (i == j) ? -1.0 : 0.0;
      for (k = 1; k <= n; ++k) temp += simi(i, k) * sim(k, j);
      error = std::max(error, std::abs(temp));
    }
  if (error > 0.1) goto L600;

  // Linear model coefficients; column mp of `a` holds minus the objective
  // gradient so trstlp can treat it as one more constraint.
  for (k = 1; k <= mp; ++k) {
    con[k] = -datmat(k, np);
    for (j = 1; j <= n; ++j) w[j] = datmat(k, j) + con[k];
    for (i = 1; i <= n; ++i) {
      temp = 0.0;
      for (j = 1; j <= n; ++j) temp += w[j] * simi(j, i);
      a(i, k) = (k == mp) ? -temp : temp;
    }
  }

  iflag = 1;
  parsig = alpha * rho;
  pareta = beta * rho;
  for (j = 1; j <= n; ++j) {
    wsig = 0.0;
    weta = 0.0;
    for (i = 1; i <= n; ++i) {
      wsig += simi(j, i) * simi(j, i);
      weta += sim(i, j) * sim(i, j);
    }
    vsig[j] = 1.0 / std::sqrt(wsig);
    veta[j] = std::sqrt(weta);
    if (vsig[j] < parsig || veta[j] > pareta) iflag = 0;
  }

  if (ibrnch == 1 || iflag == 1) goto L370;

  // The simplex geometry needs repair: replace the vertex with the longest
  // edge (or smallest sigma), stepping gamma*rho along the matching row of
  // the inverse, with the sign that best helps the merit function.
  jdrop = 0;
  temp = pareta;
  for (j = 1; j <= n; ++j) {
    if (veta[j] > temp) {
      jdrop = j;
      temp = veta[j];
    }
  }
  if (jdrop == 0) {
    for (j = 1; j <= n; ++j) {
      if (vsig[j] < temp) {
        jdrop = j;
        temp = vsig[j];
      }
    }
  }

  temp = gamma * rho * vsig[jdrop];
  for (i = 1; i <= n; ++i) dx[i] = temp * simi(jdrop, i);
  cvmaxp = 0.0;
  cvmaxm = 0.0;
  sum = 0.0;
  for (k = 1; k <= mp; ++k) {
    sum = 0.0;
    for (i = 1; i <= n; ++i) sum += a(i, k) * dx[i];
    if (k < mp) {
      temp = datmat(k, np);
      cvmaxp = std::max(cvmaxp, -sum - temp);
      cvmaxm = std::max(cvmaxm, sum - temp);
    }
  }
  dxsign = 1.0;
  if (parmu * (cvmaxp - cvmaxm) > sum + sum) dxsign = -1.0;

  temp = 0.0;
  for (i = 1; i <= n; ++i) {
    dx[i] = dxsign * dx[i];
    sim(i, jdrop) = dx[i];
    temp += simi(jdrop, i) * dx[i];
  }
  for (i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
  for (j = 1; j <= n; ++j) {
    if (j != jdrop) {
      temp = 0.0;
      for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
      for (i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
    }
    x[j] = sim(j, np) + dx[j];
  }
  goto L40;

L370:
  ifull = 0;
  trstlp(n, m, a, con, rho, dx, ifull, iact);
  if (ifull == 0) {
    temp = 0.0;
    for (i = 1; i <= n; ++i) temp += dx[i] * dx[i];
    if (temp < 0.25 * rho * rho) {
      ibrnch = 1;
      goto L550;
    }
  }

  // Predicted new violation and objective change along dx.
  resnew = 0.0;
  con[mp] = 0.0;
  for (k = 1; k <= mp; ++k) {
    sum = con[k];
    for (i = 1; i <= n; ++i) sum -= a(i, k) * dx[i];
    if (k < mp) resnew = std::max(resnew, sum);
  }

  barmu = 0.0;
  prerec = datmat(mpp, np) - resnew;
  if (prerec > 0.0) barmu = sum / prerec;
  if (parmu < 1.5 * barmu) {
    parmu = 2.0 * barmu;
    phi = datmat(mp, np) + parmu * datmat(mpp, np);
    for (j = 1; j <= n; ++j) {
      temp = datmat(mp, j) + parmu * datmat(mpp, j);
      if (temp < phi) goto L140;
      if (temp == phi && parmu == 0.0) {
        if (datmat(mpp, j) < datmat(mpp, np)) goto L140;
      }
    }
  }
  prerem = parmu * prerec - sum;

  for (i = 1; i <= n; ++i) x[i] = sim(i, np) + dx[i];
  ibrnch = 1;
  goto L40;

L440:
  vmold = datmat(mp, np) + parmu * datmat(mpp, np);
  vmnew = f + parmu * resmax;
  trured = vmold - vmnew;
  if (parmu == 0.0 && f == datmat(mp, np)) {
    prerem = prerec;
    trured = datmat(mpp, np) - resmax;
  }

  // Choose the vertex to replace by the trial point; the replacement is
  // mandatory when the merit function improved.
  ratio = (trured <= 0.0) ? 1.0 : 0.0;
  jdrop = 0;
  for (j = 1; j <= n; ++j) {
    temp = 0.0;
    for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
    temp = std::abs(temp);
    if (temp > ratio) {
      jdrop = j;
      ratio = temp;
    }
    sigbar[j] = temp * vsig[j];
  }

  edgmax = delta * rho;
  l = 0;
  for (j = 1; j <= n; ++j) {
    if (sigbar[j] >= parsig || sigbar[j] >= vsig[j]) {
      temp = veta[j];
      if (trured > 0.0) {
        temp = 0.0;
        for (i = 1; i <= n; ++i) {
          const double dvi = dx[i] - sim(i, j);
          temp += dvi * dvi;
        }
        temp = std::sqrt(temp);
      }
      if (temp > edgmax) {
        l = j;
        edgmax = temp;
      }
    }
  }
  if (l > 0) jdrop = l;
  if (jdrop == 0) goto L550;

  temp = 0.0;
  for (i = 1; i <= n; ++i) {
    sim(i, jdrop) = dx[i];
    temp += simi(jdrop, i) * dx[i];
  }
  for (i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
  for (j = 1; j <= n; ++j) {
    if (j != jdrop) {
      temp = 0.0;
      for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
      for (i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
    }
  }
  for (k = 1; k <= mpp; ++k) datmat(k, jdrop) = con[k];

  if (trured > 0.0 && trured >= 0.1 * prerem) {
    // A full-length step whose actual merit reduction essentially matches
    // the prediction means the radius, not the model, is the limiter; grow
    // it (capped at rhobeg) so long descents don't crawl at a stale scale.
    if (ifull == 1 && prerem > 0.0 && trured >= 0.9 * prerem)
      rho = std::min(2.0 * rho, rhobeg);
    goto L140;
  }
L550:
  if (iflag == 0) {
    ibrnch = 0;
    goto L140;
  }

  if (rho > rhoend) {
    rho = 0.5 * rho;
    if (rho <= 1.5 * rhoend) rho = rhoend;
    if (parmu > 0.0) {
      denom = 0.0;
      for (k = 1; k <= mp; ++k) {
        cmin = datmat(k, np);
        cmax = cmin;
        for (i = 1; i <= n; ++i) {
          cmin = std::min(cmin, datmat(k, i));
          cmax = std::max(cmax, datmat(k, i));
        }
        if (k <= m && cmin < 0.5 * cmax) {
          temp = std::max(cmax, 0.0) - cmin;
          denom = (denom <= 0.0) ? temp : std::min(denom, temp);
        }
      }
      if (denom == 0.0) {
        parmu = 0.0;
      } else if (cmax - cmin < parmu * denom) {
        parmu = (cmax - cmin) / denom;
      }
    }
    goto L140;
  }

  if (ifull == 1) goto L620;
L600:
  for (i = 1; i <= n; ++i) x[i] = sim(i, np);
  f = datmat(mp, np);
L620:
  (void)f;
  return outcome;
}

}  // namespace

OptimizationResult cobyla_minimize(const Objective& objective,
                                   std::vector<double> x0,
                                   const std::vector<Constraint>& constraints,
                                   const OptimizerConfig& config) {
  const int n = static_cast<int>(x0.size());
  const int m = static_cast<int>(constraints.size());
  if (n < 1) throw std::invalid_argument("cobyla_minimize: empty start point");
  for (const double v : x0)
    if (!std::isfinite(v))
      throw std::invalid_argument("cobyla_minimize: non-finite start point");
  if (!(config.rho_begin > 0.0))
    throw std::invalid_argument("cobyla_minimize: rho_begin must be positive");
  if (!(config.rho_end > 0.0 && config.rho_end <= config.rho_begin))
    throw std::invalid_argument("cobyla_minimize: need 0 < rho_end <= rho_begin");
  if (config.max_evals < 1)
    throw std::invalid_argument("cobyla_minimize: max_evals must be >= 1");

  std::vector<EvalRecord> history;
  std::vector<std::vector<double>> points;
  std::vector<double> buf(n);

  CalcFc calcfc = [&](const Vec1& x1, double& f, Vec1& con) {
    for (int i = 0; i < n; ++i) buf[i] = x1[i + 1];
    f = objective(std::span<const double>(buf));
    if (!std::isfinite(f))
      throw std::runtime_error(
          "cobyla_minimize: objective returned a non-finite value at evaluation " +
          std::to_string(history.size() + 1));
    double viol = 0.0;
    for (int k = 0; k < m; ++k) {
      const double c = constraints[k](std::span<const double>(buf));
      if (!std::isfinite(c))
        throw std::runtime_error(
            "cobyla_minimize: constraint " + std::to_string(k) +
            " returned a non-finite value");
      con[k + 1] = c;
      viol = std::max(viol, -c);
    }
    history.push_back({static_cast<int>(history.size()) + 1, f, viol});
    points.push_back(buf);
  };

  Vec1 x(n + 1, 0.0);
  for (int i = 0; i < n; ++i) x[i + 1] = x0[i];
  const CobylbOutcome outcome =
      cobylb(n, m, x, config.rho_begin, config.rho_end, config.max_evals, calcfc);

  OptimizationResult res;
  res.n_evals = static_cast<int>(history.size());
  res.status = outcome.hit_maxfun ? OptimStatus::max_evals_reached
                                  : OptimStatus::converged;
  res.history = history;

  // Best evaluated point: lowest f among feasible evaluations, else the
  // least-violating one (ties by f).
  int best = -1;
  for (std::size_t idx = 0; idx < history.size(); ++idx) {
    if (history[idx].max_violation <= 1e-6) {
      if (best < 0 || history[idx].f < history[best].f)
        best = static_cast<int>(idx);
    }
  }
  if (best < 0) {
    for (std::size_t idx = 0; idx < history.size(); ++idx) {
      if (best < 0 || history[idx].max_violation < history[best].max_violation ||
          (history[idx].max_violation == history[best].max_violation &&
           history[idx].f < history[best].f))
        best = static_cast<int>(idx);
    }
  }
  res.x_best = points[best];
  res.f_best = history[best].f;
  res.max_violation = history[best].max_violation;
  return res;
}

}  // namespace qbnc
