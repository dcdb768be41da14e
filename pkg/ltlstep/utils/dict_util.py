import logging
import math


def deepcopy(obj):
    # Deep copy, but only for standard data structures: dict, list, tuple, set
    if isinstance(obj, dict):
        return {deepcopy(k): deepcopy(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [deepcopy(v) for v in obj]
    elif isinstance(obj, tuple):
        return tuple(deepcopy(v) for v in obj)
    elif isinstance(obj, set):
        return {deepcopy(v) for v in obj}
    return obj


def update_dict_deep(target, source):
    # Nested dicts are merged, all other values are replaced
    if not isinstance(source, dict):
        return target
    for k, v in source.items():
        if isinstance(v, dict) and isinstance(target.get(k), dict):
            update_dict_deep(target[k], v)
        else:
            target[k] = deepcopy(v)
    return target


def check_is_sub_data(data, sub_data, tol=0):
    if data == sub_data:
        return True
    if data is None or sub_data is None:
        return False
    if isinstance(sub_data, bool) or isinstance(data, bool):
        return data == sub_data
    if isinstance(sub_data, (int, float)) and isinstance(data, (int, float)):
        return math.isclose(data, sub_data, rel_tol=tol, abs_tol=tol) if tol else data == sub_data
    if isinstance(sub_data, str):
        return isinstance(data, str) and sub_data in data
    if isinstance(sub_data, dict):
        if not isinstance(data, dict):
            return False
        for k, v in sub_data.items():
            if k not in data or not check_is_sub_data(data[k], v, tol):
                logging.debug(f"check_is_sub_data: Key {k} not in dict {data}" if k not in data
                              else f"check_is_sub_data: {k} {v} != {data[k]}")
                return False
        return True
    if isinstance(sub_data, (list, tuple)):
        if not isinstance(data, (list, tuple)) or len(data) < len(sub_data):
            return False
        return all(check_is_sub_data(data[i], v, tol) for i, v in enumerate(sub_data))
    return False

