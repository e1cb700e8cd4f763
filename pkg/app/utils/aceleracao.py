import logging

logger = logging.getLogger(__name__)

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        """Substituto sem compilação: devolve a função original."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorador(func):
            return func
        return decorador

    logger.warning('numba não instalado - laços internos rodando em Python puro')


def jit_kernel(func):
    """Compila em modo nopython com cache quando numba está disponível."""
    return njit(cache=True, nogil=True)(func)
