from .cert_measure import build_certificate_measure, eps1_window_measure
from .cert_uniform import build_certificate_uniform, certified_bound_uniform, eps1_window_uniform
from .config import get_config, reload_config
from .oracle import max_product_measure, max_product_uniform, max_single_family, max_single_family_measure
