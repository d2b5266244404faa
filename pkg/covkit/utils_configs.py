from covkit.utils.errors import BadParams


def get_config(preset_name):
    """
    Returns dict config

    Parameters
    ----------
    preset_name: str
    """
    allowed_preset_names = ('GapPreservation', 'Deterministic', 'Ternary', 'Smoke')
    if preset_name not in allowed_preset_names:
        raise BadParams(f'preset must be one of {allowed_preset_names}')

    if preset_name == 'GapPreservation':
        return GAP_PRESERVATION
    elif preset_name == 'Deterministic':
        return DETERMINISTIC
    elif preset_name == 'Ternary':
        return TERNARY
    elif preset_name == 'Smoke':
        return SMOKE

GAP_PRESERVATION = {
    'instance_parameters': {
        'n': 10,
        'm': 20,
        'q': 2,
        'c': '9/10',
        's': '1/2',
    },
    'reduction_parameters': {
        'k': 3,
        'epsilon': '1/2',
        'grouping': 'cover',
        'family': 'random',
        'eta': None,
    },
    'no_side': {
        'enabled': True,
        'min_optimum': 3,
    },
}

DETERMINISTIC = {
    'instance_parameters': {
        'n': 10,
        'm': 20,
        'q': 2,
        'c': '9/10',
        's': '1/2',
    },
    'reduction_parameters': {
        'k': 3,
        'epsilon': '1/2',
        'grouping': 'cover',
        'family': 'deterministic',
        'eta': '1/10',
    },
    'no_side': {
        'enabled': True,
        'min_optimum': 3,
    },
}

TERNARY = {
    'instance_parameters': {
        'n': 5,
        'm': 12,
        'q': 3,
        'c': '5/6',
        's': '1/2',
    },
    'reduction_parameters': {
        'k': 2,
        'epsilon': '1/2',
        'grouping': 'cover',
        'family': 'random',
        'eta': None,
    },
    'no_side': {
        'enabled': False,
        'min_optimum': 3,
    },
}

SMOKE = {
    'instance_parameters': {
        'n': 4,
        'm': 8,
        'q': 2,
        'c': '3/4',
        's': '1/4',
    },
    'reduction_parameters': {
        'k': 2,
        'epsilon': '1/2',
        'grouping': 'cover',
        'family': 'random',
        'eta': None,
    },
    'no_side': {
        'enabled': True,
        'min_optimum': 3,
    },
}
