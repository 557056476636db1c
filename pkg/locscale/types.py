"""Argument checks that are only switched on when ``LOCSCALE_DEBUG`` is set.

Public analysis functions are decorated with ``params``/``returns``; in normal
runs the decorators are identities so scans pay nothing for them.
"""
import six, inspect, os

import numpy as np


def decorator_with_args(decorator):
    def f(*args, **kwargs):
        def g(func):
            return decorator(func, *args, **kwargs)

        return g

    return f


def identity_decorator(f):
    return f


def is_real(x):
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def is_probability(x):
    return bool(is_real(x) and (np.isnan(x) or 0.0 <= x <= 1.0))


def is_array(x):
    return isinstance(x, np.ndarray)


def default_checker(obj, _type_):
    return isinstance(obj, _type_), "type '{}'".format(_type_.__name__)


def callable_checker(obj, f):
    return f(obj), f.__name__


def get_checker(x):
    if inspect.isclass(x): return default_checker
    if six.callable(x): return callable_checker
    if isinstance(x, tuple):
        def checker(obj, _type_):
            results = [get_checker(e)(obj, e) for e in _type_]
            failed = [msg for ok, msg in results if not ok]
            return len(failed) < len(results), "({})".format(','.join(failed))

        return checker
    raise TypeError("Unsupported type specification: {!r}".format(x))


def require_type(obj, _type_, fname, name=None):
    b, msg = get_checker(_type_)(obj, _type_)
    if not b:
        s = 'Return'
        if name is not None: s = "Parameter '{0}'".format(name)
        raise TypeError("{0} should be {1} but found type '{2}' instead for {3}".format(s, msg, type(obj), fname))
    return obj


DEBUG = len(os.environ.get('LOCSCALE_DEBUG', '')) > 0

if DEBUG:
    @decorator_with_args
    def params(f, **argument_types):
        signature = inspect.signature(f)

        @six.wraps(f)
        def check_call(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            for name, _type_ in six.iteritems(argument_types):
                if name in bound.arguments:
                    require_type(bound.arguments[name], _type_, f.__name__, name)
            return f(*args, **kwargs)

        return check_call


    @decorator_with_args
    def returns(f, _type_):
        @six.wraps(f)
        def check_call(*args, **kwargs):
            return require_type(f(*args, **kwargs), _type_, f.__name__)

        return check_call

else:
    def params(*arg, **kwargs):
        return identity_decorator


    def returns(*arg, **kwargs):
        return identity_decorator
