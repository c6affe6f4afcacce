import logging

BASE_LOGGER = logging.getLogger("ensemble_cma")


class ConfigError(ValueError):
    pass
