# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import base64
import hashlib
import json
import os

from cryptography import fernet
from cryptography.hazmat.backends import default_backend
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.pbkdf2 import PBKDF2HMAC

from ..Logger import get_logger
from .Exceptions import SceneRAGError

IO_LOGGER = get_logger('io')


################################################################################
#                                   Functions
################################################################################

def passgen(passwd, salt=''):
    """generate a hashed key from a password

    Args:
        passwd (None,str): password to hash
        salt (str): optional, salt for your password

    Returns:
        bytes: hashed passkey safe string
    """
    kdf = PBKDF2HMAC(
        algorithm=hashes.SHA256(),
        length=32,
        salt=salt.encode(),
        iterations=100000,
        backend=default_backend()
    )
    return base64.urlsafe_b64encode( kdf.derive( passwd.encode() ) )


def seal(raw_bytes, passwd=None):
    """optionally encrypts bytes and computes their checksum

    Args:
        raw_bytes (bytes): the plain bytes
        passwd (str,None): password to encrypt with, defaults to None (no
            encryption)

    Returns:
        (tuple): tuple containing:

            bytes: the optionally encrypted bytes
            str: the sha256 checksum of the returned bytes
    """
    if passwd:
        encoded = fernet.Fernet( passgen(passwd) ).encrypt(raw_bytes)
    else:
        encoded = raw_bytes

    return encoded, hashlib.sha256(encoded).hexdigest()


def unseal(encoded, passwd=None, checksum=None, source='<bytes>'):
    """verifies and optionally decrypts bytes produced by :func:`seal`

    Args:
        encoded (bytes): sealed bytes
        passwd (str,None): password the bytes were encrypted with
        checksum (str,None): the sha256 checksum to check the bytes against
        source (str): a name for the bytes used in error messages

    Returns:
        bytes: the plain bytes
    """
    if checksum:
        fchecksum = hashlib.sha256(encoded).hexdigest()
        if fchecksum != checksum:
            msg = "'%s' checksum doesn't match" % source
            IO_LOGGER.error(msg)
            raise SceneRAGError(msg)

    if passwd:
        try:
            return fernet.Fernet( passgen(passwd) ).decrypt(encoded)
        except fernet.InvalidToken:
            msg = "unable to decrypt '%s', wrong password?" % source
            IO_LOGGER.error(msg)
            raise SceneRAGError(msg)

    return encoded


# -------------------------------- Input/Output --------------------------------

def prevent_overwrite(filename,create_file=False):
    """
    checks to see if a file or directory already exists and creates a
    new filename if it does. It can also create the file if specificed

    when creating a file, this function assumes that if there is no file
    extension then it should create a directory

    Args:
        filename (str): the full file or directory path to be
            overwrite protected
        create_file (bool): Default is False
            boolean indicating whether or not to create the file
            before returning

    Returns:
        str: the assuredly unique output filename
    """
    base_filename,extension = os.path.splitext(filename)
    out_filename = filename
    file_exists = os.path.exists(out_filename)
    num = 1

    while file_exists:
        out_filename = "{base}({num}){ext}".format(base=base_filename,
                                        num=make_numbered_prefix(num,0),
                                        ext=extension)
        num += 1
        file_exists = os.path.exists(out_filename)

    if create_file:
        if extension == "":
            os.makedirs(out_filename)
        else:
            base_path = os.path.split(out_filename)[0]
            if base_path and not os.path.exists(base_path):
                os.makedirs(base_path)
            with open(out_filename,'w') as out:
                out.write('')

    return out_filename


def make_numbered_prefix(file_number,number_digits=5):
    """
    returns a number string designed to be used in the prefix of
    systematic outputs.

    example use case
        "00001example_output_file.txt"
        "00002example_output_file.txt"

    Args:
        file_number (int): the number you want to prefix
        number_digits (int): minimum number of digits in the output
            string. Default is 5
    Returns:
        str: string of numbers with standard at least
            'number_digits' of digits
    """
    file_number = int( file_number )
    sign = '-' if file_number < 0 else ''
    return sign + str( abs(file_number) ).zfill(number_digits)


def dumps_json(obj):
    """serializes to a canonical JSON string (sorted keys, no trailing space)

    Python's float repr round trips exactly, so a canonical dump of the same
    numbers always produces the same bytes
    """
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False)


def write_json(filename, obj, indent=None):
    """writes a single JSON document"""
    with open(filename, 'w', encoding='utf-8') as f:
        json.dump(obj, f, sort_keys=True, ensure_ascii=False, indent=indent)
        f.write('\n')
    return filename


def read_json(filename):
    """reads a single JSON document"""
    with open(filename, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_jsonl(filename, rows):
    """writes an iterable of dicts as JSON lines

    Returns:
        int: the number of lines written
    """
    n = 0
    with open(filename, 'w', encoding='utf-8') as f:
        for row in rows:
            f.write( dumps_json(row) + '\n' )
            n += 1
    IO_LOGGER.debug("wrote {} lines to '{}'".format(n, filename))
    return n


def read_jsonl(filename):
    """reads a JSON lines file into a list of dicts, blank lines are skipped"""
    rows = []
    with open(filename, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append( json.loads(line) )
            except json.JSONDecodeError as e:
                msg = "bad JSON on line {} of '{}': {}".format(lineno, filename, e)
                IO_LOGGER.error(msg)
                raise SceneRAGError(msg)
    return rows
