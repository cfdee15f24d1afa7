from typing import Iterable, List


def fresh_values(count: int, avoid: Iterable[str] = ()) -> List[str]:
    """ Returns count numeric data values, in order, none of which occur in avoid """
    taken = set(avoid)
    values = []
    candidate = 1
    while len(values) < count:
        if str(candidate) not in taken:
            values.append(str(candidate))
        candidate += 1
    return values


def by_text(items: Iterable) -> list:
    """ Sorts facts, atoms or nodes by their printed form """
    return sorted(items, key=str)
