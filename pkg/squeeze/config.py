from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    log_level: str = "INFO"

    # Photon-number distributions
    distribution_mass_target: float = 1.0 - 1e-10
    distribution_hard_cap: int = 1_000_000
    distribution_tail_terms: int = 10 # same-parity terms that must all be negligible
    distribution_tail_threshold: float = 1e-16

    # Cross-route and oracle tolerances
    route_rel_tol: float = 1e-9
    oracle_abs_tol: float = 1e-8
    oracle_default_dim: int = 256
    oracle_max_dim: int = 8192
    oracle_acceptance_tol: float = 1e-10 # |value(dim) - value(2 dim)|
    expm_max_norm: float = 1e5

    # Special functions
    q_contamination_limit: float = 1e-11
    bessel_start_margin: int = 40
    bessel_complex_max_abs: float = 20.0
    cancellation_digits: float = 6.0 # residual loss that gets a condition note
    extended_precision_digits: float = 3.0 # loss past which terminating sums are redone in mpmath
    extended_guard_digits: int = 12
    extended_max_dps: int = 400
    hermite_sup_bound: float = 0.02 # exact vs large-squeezing p_m(5) at r = 1.5

    # Series and quadrature
    series_max_terms: int = 100_000
    quadrature_max_panels: int = 400
    quadrature_panel_width: float = 1.0 # in units of the weight scale I0

    # Validation work pool
    validate_workers: int = 4 # joblib processes; 1 runs in-process
    propagator_cache_size: int = 16
    propagator_cache_max_bytes: int = 1_000_000_000

    model_config = SettingsConfigDict(env_prefix="SQUEEZE_", env_file=".env", extra="ignore")

settings = Settings()
