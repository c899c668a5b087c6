# -*- coding: utf-8 -*-

import argparse
from collections import OrderedDict
import sys


class ArgumentParser(argparse.ArgumentParser):
    '''
    An ArgumentParser that writes to custom stdout and stderr file-like
    objects and remembers the status it exited with.
    '''
    prog = ''
    usage = None
    description = None
    epilog = None
    add_help = True

    stdout = sys.stdout
    stderr = sys.stderr

    def __init__(self, prog=None, usage=None, description=None, epilog=None,
            add_help=None, stdout=None, stderr=None, **kwargs):
        for name, value in (('prog', prog), ('usage', usage),
                ('description', description), ('epilog', epilog),
                ('add_help', add_help), ('stdout', stdout), ('stderr', stderr)):
            if value is not None:
                setattr(self, name, value)
        self.exit_status = None

        super(ArgumentParser, self).__init__(self.prog,
                usage=self.usage,
                description=self.description,
                epilog=self.epilog,
                add_help=self.add_help,
                formatter_class=argparse.RawDescriptionHelpFormatter,
                **kwargs)

    def _print_message(self, message, file=None):
        if file is sys.stdout:
            file = self.stdout
        elif file is None or file is sys.stderr:
            file = self.stderr
        if message:
            file.write(message)
            file.flush()

    def exit(self, status=0, message=None):
        self.exit_status = status
        super(ArgumentParser, self).exit(status, message)


class GroupingArgumentParser(ArgumentParser):
    '''
    ArgumentParser whose options are declared under named groups and
    can be read back per group after parsing.
    '''
    default_group = 'general arguments'

    def __init__(self, *args, **kwargs):
        self._group_dests = OrderedDict()
        self._group_parsers = dict()
        super(GroupingArgumentParser, self).__init__(*args, **kwargs)

    def add_argument(self, *names, **kwargs):
        group = kwargs.pop('group', '') or self.default_group
        if group not in self._group_parsers:
            self._group_parsers[group] = self.add_argument_group(group)
            self._group_dests[group] = []
        action = self._group_parsers[group].add_argument(*names, **kwargs)
        self._group_dests[group].append(action.dest)
        return action

    def group_parse_args(self, argv):
        '''
        Parse ``argv`` and return ``(namespace, groups)`` where ``groups``
        maps every group name to a Namespace of its own options.
        '''
        args = super(GroupingArgumentParser, self).parse_args(argv)
        groups = OrderedDict()
        for group, dests in self._group_dests.items():
            ns = argparse.Namespace()
            for dest in dests:
                if hasattr(args, dest):
                    setattr(ns, dest, getattr(args, dest))
            groups[group] = ns
        return args, groups
