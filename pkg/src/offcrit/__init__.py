"""Desk-scale numerical laboratory for fourth moments of the Riemann zeta
function off the critical line.

Subpackages, bottom of the stack first:

  core_numerics  -- log-gamma, Bernoulli/Euler constants, adaptive and
                    Filon-type oscillatory quadrature, truncated Gaussian
                    moment integrals
  zeta_engine    -- Euler--Maclaurin evaluation of zeta(s) and fourth-power
                    moment integrals
  hypergeom      -- Gauss 2F1 in the regimes the oscillatory kernel needs
  lambda_kernel  -- the oscillatory spectral-weight kernel, direct quadrature
                    and saddle-point asymptotics
  moment_lab     -- main terms, error-term extraction, fits and scan
                    statistics
  spectral_data  -- Maass cusp-form data ingestion, Hecke series values,
                    spectral prediction sums
  cli            -- batch command-line front end
"""

__version__ = "0.1.0"
