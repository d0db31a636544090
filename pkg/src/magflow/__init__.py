"""Magnetic flows on surfaces of revolution.

Certified contact-type bounds, reduced dynamics and Birkhoff actions,
linearized-flow Conley-Zehnder indices, and quaternionic double-cover
verifications for rotationally symmetric magnetic systems on the sphere.
"""
from .profiles import (  # noqa: F401
    ProfileFunction,
    SphereProfile,
    EllipsoidProfile,
    SplineProfile,
    StretchBump,
    StretchedProfile,
    make_sphere,
    make_ellipsoid,
    make_spindle,
    make_negative_action,
    stretch,
    normalize_stretch,
    validate,
    save_profile,
    load_profile,
    parse_profile_spec,
)
from .contact import (  # noqa: F401
    ContactPrimitiveError,
    ContactBoundsReport,
    beta_theta,
    beta_ratio,
    m_gamma,
    m_plus_minus,
    magnetic_curvature,
    min_curvature,
    km_positive,
    km_positive_threshold,
    contact_interval,
    h_min,
    require_contact,
    symmetric_increasing_check,
)
from .reduced import (  # noqa: F401
    LevelRangeError,
    KmNotPositiveError,
    IRange,
    TurningPoints,
    ReducedLevel,
    LatitudeOrbit,
    ClosureInfo,
    ContactVerdict,
    I_hat,
    I_hat_pm,
    I_range,
    turning_points,
    birkhoff_action,
    latitude_action,
    latitudes,
    find_latitude,
    regular_levels,
    action_scan,
    scan_csv_lines,
    orbit_closure,
    rational_closures,
    minimal_contractible_closure,
    contact_verdict,
)
from .flow import (  # noqa: F401
    PoleApproachError,
    Trajectory,
    OdeLevel,
    vector_field,
    integrate,
    invariant_drift,
    band_state,
    level_average_ode,
    compare_level,
    birkhoff_action_quad,
    birkhoff_action_ode,
    liouville_action,
)
from .cz import (  # noqa: F401
    FrameError,
    SymplecticPath,
    WindingInterval,
    CZResult,
    OrbitIndexReport,
    ConvexityReport,
    h_value,
    coframe_eval,
    frame_state,
    linearized_rhs,
    chi_project,
    integrate_linearized,
    linearized_flow,
    winding_interval,
    index_from_interval,
    cz_index,
    latitude_cz,
    cz_fiber,
    path_deviation,
    latitude_deviation,
    dynamical_convexity_report,
)
from .hopf import (  # noqa: F401
    KnotPolyline,
    LiftResult,
    AntipodalLinkReport,
    HessianScan,
    quat_mul,
    quat_conj,
    conj_rot,
    rotation_matrix,
    quat_from_rotation,
    p0,
    dp0,
    psi0,
    lambda_st,
    pullback_residual,
    star_embed,
    q_rho,
    hessian_convexity,
    knot_from_samples,
    gauss_linking,
    antipodal_link_parity,
    lift_path,
    sphere_frames,
)

__version__ = "0.1.0"
