# -*- coding: utf-8 -*-

import sys

from . import bigjump


def main():
    args = sys.argv[1:]
    return bigjump(args)


if __name__ == '__main__':
    status = main()
    sys.exit(status)
